#pragma once

// Delta-k-stage vulnerability of the target node.
//
// Three evaluators share one stochastic model:
//  * the one-stage closed form (imminent vulnerability),
//  * the union-bound recursions (lower: max of singletons, upper: capped sum),
//  * an exact forward propagation over compromised sets for small networks.
//
// Stage dynamics used by the exact evaluator and the Monte-Carlo simulator:
//  1. every service link i->j realizes with beta_ij; one honey link (l,w) realizes with gamma_lw;
//  2. every compromised node attacks along every outbound link, one hop per stage;
//  3. a service-link attack i->j succeeds with lambda_ij;
//  4. the honey link detects the attacker iff l is compromised, w is idle and the
//     attacker fails to identify it (probability 1 - q_lw);
//  5. detection preempts every compromise of the same stage, including the target;
//  6. an interfering or identified honey link has no effect.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latmove/core.hpp"
#include "latmove/net_model.hpp"

namespace latmove {

enum class BoundVariant { Lower, Upper };

inline constexpr std::size_t kDefaultExactCap = 12;
inline constexpr std::size_t kDefaultBoundsCap = 20;

/// Probability that a node i, attacking alone, compromises every node in v,
/// fails on every node in u and has no service link to the rest of V\{i,j0}.
double partial_compromise_prob(const NetworkSpec& spec, NodeIndex i, NodeIndex j0, NodeSet v, NodeSet u);

/// One-stage capture weight gamma_iw (1 - q_iw) Pr(w idle) of the honey link i->w.
double immediate_capture_prob(const NetworkSpec& spec, const PolicyMatrix& policy, NodeIndex i, NodeIndex w);

/// One-stage vulnerability starting from any single non-target node.
double single_stage_vulnerability(const NetworkSpec& spec, const PolicyMatrix& policy, NodeIndex i);

/// One-stage vulnerability from a DMZ node; throws InitialNodeNotInDmz otherwise.
double imminent_vulnerability(const NetworkSpec& spec, const PolicyMatrix& policy, NodeIndex i);

/// Single-node bound values g[d][j] for d = 0..horizon and every node j (target entries are 0).
class BoundTable {
public:
    BoundTable() = default;
    BoundTable(BoundVariant variant, std::vector<std::vector<double>> rows)
        : variant_(variant), rows_(std::move(rows)) {}

    BoundVariant variant() const { return variant_; }
    std::size_t horizon() const { return rows_.empty() ? 0 : rows_.size() - 1; }
    double operator()(std::size_t delta_k, NodeIndex j) const { return rows_[delta_k][j]; }
    const std::vector<double>& row(std::size_t delta_k) const { return rows_[delta_k]; }

private:
    BoundVariant variant_ = BoundVariant::Lower;
    std::vector<std::vector<double>> rows_;
};

/// Result of one recursion step for start node j with the previous horizon frozen.
struct RecursionStep {
    double value = 0.0;
    /// d value / d gamma_{j,w} for every w, with the previous horizon held constant.
    std::vector<double> gradient;
};

/// One recursion step for node j given the previous-horizon row `prev` (size N).
/// Passing `prev = nullptr` evaluates the base case.
RecursionStep bound_step(const NetworkSpec& spec, const PolicyMatrix& policy, NodeIndex j,
                         const std::vector<double>* prev, BoundVariant variant);

/// Memoized union-bound table up to `delta_k`. Throws NetworkTooLarge when N > bounds_cap.
BoundTable bound_table(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                       BoundVariant variant, std::size_t bounds_cap = kDefaultBoundsCap);

/// Lower-bound vulnerability at `delta_k` for every DMZ node.
std::map<NodeIndex, double> ltv_lower(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k);
/// Upper-bound vulnerability at `delta_k` for every DMZ node.
std::map<NodeIndex, double> ltv_upper(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k);

struct ExactTrajectory {
    /// target_compromised[d]: probability the target falls within stages 0..d.
    std::vector<double> target_compromised;
    /// detected[d]: probability the attacker has been detected within stages 0..d.
    std::vector<double> detected;
    /// Largest |total mass - 1| seen over all stages.
    double max_mass_error = 0.0;
};

/// Exact propagation from an arbitrary initially compromised set (must not contain the target).
ExactTrajectory exact_trajectory(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                                 NodeSet start, std::size_t exact_cap = kDefaultExactCap);

/// Exact trajectories for every DMZ node. Throws NetworkTooLargeForExact when N > exact_cap.
std::map<NodeIndex, ExactTrajectory> ltv_exact(const NetworkSpec& spec, const PolicyMatrix& policy,
                                               std::size_t delta_k, std::size_t exact_cap = kDefaultExactCap);

/// rho-weighted sum; throws MissingInitialNode if a DMZ node is absent.
double aggregate_ltv(const NetworkSpec& spec, const std::map<NodeIndex, double>& per_initial);

struct VulnerabilityPoint {
    std::optional<double> exact;
    double lower = 0.0;
    double upper = 0.0;

    friend bool operator==(const VulnerabilityPoint&, const VulnerabilityPoint&) = default;
};

struct VulnerabilityReport {
    std::size_t delta_k = 0;
    /// per_initial[i][d] for every DMZ node i and d = 0..delta_k.
    std::map<NodeIndex, std::vector<VulnerabilityPoint>> per_initial;
    /// aggregate[d] for d = 0..delta_k.
    std::vector<VulnerabilityPoint> aggregate;

    bool has_exact() const { return !aggregate.empty() && aggregate.front().exact.has_value(); }
    const VulnerabilityPoint& final_aggregate() const { return aggregate.back(); }

    friend bool operator==(const VulnerabilityReport&, const VulnerabilityReport&) = default;
};

struct ReportOptions {
    bool bounds_only = false;
    std::size_t exact_cap = kDefaultExactCap;
    std::size_t bounds_cap = kDefaultBoundsCap;
};

VulnerabilityReport vulnerability_report(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                                         const ReportOptions& options = {});

struct SecurityCheck {
    bool secure = false;
    double compared_value = 0.0;
    /// "exact" or "upper".
    std::string compared_figure;
};

/// Level-T0 security at the report horizon: aggregate exact (or upper bound) <= T0.
SecurityCheck check_security_level(const VulnerabilityReport& report, double threshold);

struct SandwichViolation {
    NodeIndex initial = 0;
    std::size_t delta_k = 0;
    double exact = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct SandwichDiagnostics {
    std::size_t points_checked = 0;
    std::vector<SandwichViolation> violations;
    double violation_rate() const {
        return points_checked == 0 ? 0.0 : static_cast<double>(violations.size()) / points_checked;
    }
};

/// Reports every point where exact lies outside [lower, upper] by more than `tol`.
SandwichDiagnostics sandwich_diagnostics(const VulnerabilityReport& report, double tol = 1e-12);

}  // namespace latmove
