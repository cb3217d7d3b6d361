#pragma once

// Closed-form analytics for two heuristic policy families with a single DMZ node i:
// indirect policies (no honey link out of i) and direct policies (honey link i -> w0 always).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "latmove/ltv_core.hpp"
#include "latmove/net_model.hpp"

namespace latmove {

/// Probability that an attacker at i neither hits j0 directly nor moves anywhere in one stage.
double pomd(const NetworkSpec& spec, NodeIndex i, NodeIndex j0);

/// 1 - r^delta_k (1 - beta_lambda): upper bound on the vulnerability of an indirect policy.
double indirect_bound(double r, double beta_lambda, std::size_t delta_k);

enum class TocRegime { Critical, Secure, Insecure };

const char* to_string(TocRegime regime);

struct TocLimit {
    double value = 0.0;
    TocRegime regime = TocRegime::Critical;
};

/// Limit of indirect_bound as delta_k grows along r = 1 - m delta_k^-n.
/// |n - 1| <= 1e-12 is treated as n = 1.
TocLimit toc_limit(double m, double n, double beta_lambda);

/// Deterrence threshold 1 - m / delta_k.
double toc_threshold(double m, std::size_t delta_k);

struct DirectAnalysis {
    NodeIndex initial = 0;
    NodeIndex target = 0;
    NodeIndex honeypot = 0;
    double beta_lambda = 0.0;  ///< direct hit probability i -> j0
    double k1 = 0.0;           ///< w0 idle and the honey link not identified
    double k2 = 0.0;           ///< no service link i -> w0, everything else free
    double r2 = 0.0;
    /// (1 - beta_lambda)(1 - k1): rate of the recurrence when the honey-link branch is
    /// subtracted with its own idle factor. r2 >= this, so t2_lower1 can exceed the exact value.
    double recurrence_rate = 0.0;
    double t2_upper = 0.0;
    double t2_lower2 = 0.0;

    double t2_lower1(std::size_t delta_k) const;
    /// Limit of t2_lower1 as delta_k grows.
    double t2_lower1_limit() const;
    double residue() const;
    /// Lower bound obtained by solving the recurrence with recurrence_rate.
    double recurrence_lower(std::size_t delta_k) const;
};

/// Throws InvalidHoneypotNode if w0 is i, j0 or not reconfigurable.
DirectAnalysis direct_analysis(const NetworkSpec& spec, NodeIndex i, NodeIndex j0, NodeIndex w0);

/// Deterministic policy with the honey link fixed on i -> w0.
PolicyMatrix direct_policy(const NetworkSpec& spec, NodeIndex i, NodeIndex w0);

struct ResidueDeviation {
    std::size_t delta_k = 0;
    double exact = 0.0;
    double bound = 0.0;
    /// "below_t2_lower1", "below_recurrence_lower", "above_t2_upper" or "no_strict_increase"
    std::string kind;
};

struct ResidueReport {
    DirectAnalysis analysis;
    std::vector<double> exact;  ///< exact[d] for d = 0..horizon
    bool sandwich_holds = true;
    bool recurrence_lower_holds = true;
    bool strict_increase_holds = true;
    /// exact at the last horizon minus the residue.
    double residue_gap = 0.0;
    std::vector<ResidueDeviation> deviations;
};

/// Exact trajectory under the direct policy checked against the closed-form bounds.
/// Deviations beyond `tol` are reported, never thrown.
ResidueReport verify_residue(const NetworkSpec& spec, NodeIndex i, NodeIndex j0, NodeIndex w0,
                             std::size_t horizon, double tol = 1e-12, std::size_t exact_cap = kDefaultExactCap);

/// One row of a horizon sweep; absent columns are written as empty CSV cells.
struct SweepRow {
    std::size_t delta_k = 0;
    std::optional<double> exact;
    std::optional<double> eq9_bound;
    std::optional<double> t2_lower1;
    std::optional<double> t2_upper;
    std::optional<double> t2_lower2;
};

/// Sweep for an indirect policy from DMZ node i: exact (when N <= cap) and the deterrence bound.
std::vector<SweepRow> indirect_sweep(const NetworkSpec& spec, const PolicyMatrix& policy, NodeIndex i,
                                     std::size_t horizon, std::size_t exact_cap = kDefaultExactCap);

/// Sweep for the direct policy i -> w0: exact (when N <= cap) and the residue bounds.
std::vector<SweepRow> direct_sweep(const NetworkSpec& spec, NodeIndex i, NodeIndex w0, std::size_t horizon,
                                   std::size_t exact_cap = kDefaultExactCap);

}  // namespace latmove
