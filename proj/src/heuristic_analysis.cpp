#include "latmove/heuristic_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "latmove/errors.hpp"

namespace latmove {

namespace {

void require_node(const NetworkSpec& spec, NodeIndex v, const char* what) {
    if (v >= spec.node_count()) {
        throw Error(ErrorCode::IndexOutOfRange, std::string(what) + " index " + std::to_string(v) + " out of range");
    }
}

void require_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must lie in [0, 1]");
}

double hit(const NetworkSpec& spec, NodeIndex i, NodeIndex j) { return spec.beta(i, j) * spec.lambda(i, j); }

}  // namespace

double pomd(const NetworkSpec& spec, NodeIndex i, NodeIndex j0) {
    require_node(spec, i, "initial");
    require_node(spec, j0, "target");
    if (!spec.dmz().contains(i)) throw Error(ErrorCode::InitialNodeNotInDmz, "node " + std::to_string(i));
    if (i == j0) throw Error(ErrorCode::InvalidArgument, "initial node equals the target");
    double r = 1.0 - hit(spec, i, j0);
    for (NodeIndex h = 0; h < spec.node_count(); ++h) {
        if (h != i && h != j0) r *= 1.0 - hit(spec, i, h);
    }
    return r;
}

double indirect_bound(double r, double beta_lambda, std::size_t delta_k) {
    require_probability(r, "r");
    require_probability(beta_lambda, "beta_lambda");
    return 1.0 - std::pow(r, static_cast<double>(delta_k)) * (1.0 - beta_lambda);
}

const char* to_string(TocRegime regime) {
    switch (regime) {
        case TocRegime::Critical: return "critical";
        case TocRegime::Secure: return "secure";
        case TocRegime::Insecure: return "insecure";
    }
    return "unknown";
}

TocLimit toc_limit(double m, double n, double beta_lambda) {
    if (!(m > 0.0) || !(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "m and n must be positive");
    require_probability(beta_lambda, "beta_lambda");
    if (std::abs(n - 1.0) <= 1e-12) return {1.0 - std::exp(-m) * (1.0 - beta_lambda), TocRegime::Critical};
    if (n > 1.0) return {beta_lambda, TocRegime::Secure};
    return {1.0, TocRegime::Insecure};
}

double toc_threshold(double m, std::size_t delta_k) {
    if (delta_k == 0) throw Error(ErrorCode::InvalidArgument, "delta_k must be >= 1");
    return 1.0 - m / static_cast<double>(delta_k);
}

namespace {

double geometric_lower(double base, double rate, std::size_t delta_k) {
    if (rate == 1.0) return base * static_cast<double>(delta_k + 1);
    return base * (1.0 - std::pow(rate, static_cast<double>(delta_k + 1))) / (1.0 - rate);
}

}  // namespace

double DirectAnalysis::t2_lower1(std::size_t delta_k) const {
    return geometric_lower(beta_lambda * (1.0 - k1), r2, delta_k);
}

double DirectAnalysis::recurrence_lower(std::size_t delta_k) const {
    return geometric_lower(beta_lambda * (1.0 - k1), recurrence_rate, delta_k);
}

double DirectAnalysis::t2_lower1_limit() const {
    const double base = beta_lambda * (1.0 - k1);
    if (base == 0.0) return 0.0;
    return base / (1.0 - r2);
}

double DirectAnalysis::residue() const { return std::max(t2_lower1_limit(), t2_lower2); }

DirectAnalysis direct_analysis(const NetworkSpec& spec, NodeIndex i, NodeIndex j0, NodeIndex w0) {
    require_node(spec, i, "initial");
    require_node(spec, j0, "target");
    require_node(spec, w0, "honeypot");
    if (i == j0) throw Error(ErrorCode::InvalidArgument, "initial node equals the target");
    if (w0 == i || w0 == j0) {
        throw Error(ErrorCode::InvalidHoneypotNode, "honeypot node must differ from the initial node and the target");
    }
    if (!spec.reconfigurable().contains(w0)) {
        throw Error(ErrorCode::InvalidHoneypotNode, "node " + std::to_string(w0) + " is not reconfigurable");
    }

    DirectAnalysis a;
    a.initial = i;
    a.target = j0;
    a.honeypot = w0;
    a.beta_lambda = hit(spec, i, j0);
    a.k1 = idle_prob(spec, w0) * (1.0 - spec.q(i, w0));
    // Links to every other node sum out to one; only i -> w0 must stay unrealized.
    a.k2 = 1.0 - spec.beta(i, w0);

    const double bl = a.beta_lambda;
    const double kept = a.k1 * a.k2 * (1.0 - spec.beta(i, w0));
    a.r2 = (1.0 - bl) * (1.0 - kept);
    a.recurrence_rate = (1.0 - bl) * (1.0 - a.k1);
    a.t2_upper = 1.0 - bl * a.k1 - (1.0 - bl) * kept;
    const double denom = (1.0 - bl) * kept + bl;
    a.t2_lower2 = denom == 0.0 ? 0.0 : bl * (1.0 - a.k1) / denom;
    return a;
}

PolicyMatrix direct_policy(const NetworkSpec& spec, NodeIndex i, NodeIndex w0) {
    return PolicyMatrix::deterministic(spec, Link{i, w0});
}

ResidueReport verify_residue(const NetworkSpec& spec, NodeIndex i, NodeIndex j0, NodeIndex w0, std::size_t horizon,
                             double tol, std::size_t exact_cap) {
    if (j0 != spec.target()) throw Error(ErrorCode::InvalidArgument, "j0 must be the network's target");
    ResidueReport report;
    report.analysis = direct_analysis(spec, i, j0, w0);
    const DirectAnalysis& a = report.analysis;
    report.exact =
        exact_trajectory(spec, direct_policy(spec, i, w0), horizon, NodeSet::single(i), exact_cap).target_compromised;

    for (std::size_t d = 0; d <= horizon; ++d) {
        const double g = report.exact[d];
        const double lo = a.t2_lower1(d);
        if (g < lo - tol) {
            report.sandwich_holds = false;
            report.deviations.push_back({d, g, lo, "below_t2_lower1"});
        }
        const double rec = a.recurrence_lower(d);
        if (g < rec - tol) {
            report.recurrence_lower_holds = false;
            report.deviations.push_back({d, g, rec, "below_recurrence_lower"});
        }
        if (g > a.t2_upper + tol) {
            report.sandwich_holds = false;
            report.deviations.push_back({d, g, a.t2_upper, "above_t2_upper"});
        }
        if (d > 0 && report.exact[d - 1] < a.t2_lower2 && !(g > report.exact[d - 1])) {
            report.strict_increase_holds = false;
            report.deviations.push_back({d, g, report.exact[d - 1], "no_strict_increase"});
        }
    }
    report.residue_gap = report.exact.back() - a.residue();
    return report;
}

std::vector<SweepRow> indirect_sweep(const NetworkSpec& spec, const PolicyMatrix& policy, NodeIndex i,
                                     std::size_t horizon, std::size_t exact_cap) {
    const NodeIndex j0 = spec.target();
    const double r = pomd(spec, i, j0);
    for (NodeIndex w = 0; w < spec.node_count(); ++w) {
        if (policy(i, w) > 0.0) {
            throw Error(ErrorCode::InvalidArgument, "policy places a honey link on the initial node; not indirect");
        }
    }
    std::vector<double> exact;
    if (spec.node_count() <= exact_cap) {
        exact = exact_trajectory(spec, policy, horizon, NodeSet::single(i), exact_cap).target_compromised;
    }
    std::vector<SweepRow> rows;
    for (std::size_t d = 0; d <= horizon; ++d) {
        SweepRow row;
        row.delta_k = d;
        if (!exact.empty()) row.exact = exact[d];
        row.eq9_bound = indirect_bound(r, hit(spec, i, j0), d);
        rows.push_back(row);
    }
    return rows;
}

std::vector<SweepRow> direct_sweep(const NetworkSpec& spec, NodeIndex i, NodeIndex w0, std::size_t horizon,
                                   std::size_t exact_cap) {
    const DirectAnalysis a = direct_analysis(spec, i, spec.target(), w0);
    std::vector<double> exact;
    if (spec.node_count() <= exact_cap) {
        exact = exact_trajectory(spec, direct_policy(spec, i, w0), horizon, NodeSet::single(i), exact_cap)
                    .target_compromised;
    }
    std::vector<SweepRow> rows;
    for (std::size_t d = 0; d <= horizon; ++d) {
        SweepRow row;
        row.delta_k = d;
        if (!exact.empty()) row.exact = exact[d];
        row.t2_lower1 = a.t2_lower1(d);
        row.t2_upper = a.t2_upper;
        row.t2_lower2 = a.t2_lower2;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace latmove
