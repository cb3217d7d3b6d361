#include "latmove/ltv_core.hpp"

#include <algorithm>
#include <cmath>

#include "latmove/errors.hpp"

namespace latmove {

namespace {

void require_node(const NetworkSpec& spec, NodeIndex i, const char* what) {
    if (i >= spec.node_count()) {
        throw Error(ErrorCode::IndexOutOfRange, std::string(what) + " " + std::to_string(i) + " out of range");
    }
}

void require_dmz(const NetworkSpec& spec, NodeIndex i) {
    require_node(spec, i, "initial node");
    if (!spec.dmz().contains(i)) {
        throw Error(ErrorCode::InitialNodeNotInDmz, "node " + std::to_string(i) + " is not in the dmz");
    }
}

/// Pr(w idle | no link from i): sources V\{i,w}, sinks V\{w}.
double idle_given_no_link_from(const NetworkSpec& spec, NodeIndex i, NodeIndex w) {
    const NodeSet others = spec.all_nodes().without(w);
    return no_interference_prob(spec, others.without(i), w, others);
}

}  // namespace

double partial_compromise_prob(const NetworkSpec& spec, NodeIndex i, NodeIndex j0, NodeSet v, NodeSet u) {
    require_node(spec, i, "node");
    require_node(spec, j0, "target");
    if (v.intersects(u)) throw Error(ErrorCode::OverlappingSets, "v and u overlap");
    const NodeSet all = spec.all_nodes();
    if (!(v | u).is_subset_of(all)) throw Error(ErrorCode::IndexOutOfRange, "set member out of range");
    if (v.contains(i) || v.contains(j0) || u.contains(i) || u.contains(j0)) {
        throw Error(ErrorCode::SetContainsIorJ0, "v and u must exclude the source and the target");
    }
    double p = 1.0;
    v.for_each([&](NodeIndex h) { p *= spec.beta(i, h) * spec.lambda(i, h); });
    u.for_each([&](NodeIndex h) { p *= spec.beta(i, h) * (1.0 - spec.lambda(i, h)); });
    const NodeSet rest = all.without(i).without(j0) - v - u;
    rest.for_each([&](NodeIndex h) { p *= 1.0 - spec.beta(i, h); });
    return p;
}

double immediate_capture_prob(const NetworkSpec& spec, const PolicyMatrix& policy, NodeIndex i, NodeIndex w) {
    if (w == i) return 0.0;
    return policy(i, w) * (1.0 - spec.q(i, w)) * idle_prob(spec, w);
}

double single_stage_vulnerability(const NetworkSpec& spec, const PolicyMatrix& policy, NodeIndex i) {
    require_node(spec, i, "node");
    const NodeIndex j0 = spec.target();
    if (i == j0) throw Error(ErrorCode::InvalidArgument, "start node equals the target");
    CompensatedSum capture;
    for (NodeIndex w = 0; w < spec.node_count(); ++w) {
        if (w == i || w == j0) continue;
        capture += immediate_capture_prob(spec, policy, i, w);
    }
    return spec.hit(i, j0) * (1.0 - capture.value());
}

double imminent_vulnerability(const NetworkSpec& spec, const PolicyMatrix& policy, NodeIndex i) {
    require_dmz(spec, i);
    return single_stage_vulnerability(spec, policy, i);
}

RecursionStep bound_step(const NetworkSpec& spec, const PolicyMatrix& policy, NodeIndex j,
                         const std::vector<double>* prev, BoundVariant variant) {
    require_node(spec, j, "node");
    const std::size_t n = spec.node_count();
    const NodeIndex j0 = spec.target();
    if (j == j0) throw Error(ErrorCode::InvalidArgument, "start node equals the target");

    RecursionStep step;
    step.gradient.assign(n, 0.0);
    const double direct = spec.hit(j, j0);

    // Base case: direct hit not preempted by an immediate capture.
    CompensatedSum capture0;
    for (NodeIndex w = 0; w < n; ++w) {
        if (w == j || w == j0) continue;
        const double idle = idle_prob(spec, w);
        capture0 += policy(j, w) * (1.0 - spec.q(j, w)) * idle;
        step.gradient[w] = -direct * (1.0 - spec.q(j, w)) * idle;
    }
    const double base = direct * (1.0 - capture0.value());
    if (prev == nullptr) {
        step.value = std::clamp(base, 0.0, 1.0);
        return step;
    }

    // Recursive term. The double sum over (v, u) is evaluated with the u-sum in
    // closed form: for fixed v, nodes outside v independently have either no
    // successful compromise (weight 1 - beta*lambda) or, when w must not be a
    // link sink, no link at all (weight 1 - beta).
    const std::vector<NodeIndex> rest = spec.all_nodes().without(j).without(j0).members();
    const std::size_t m = rest.size();
    std::vector<double> hit(m), miss(m), no_link(m), prev_rest(m);
    for (std::size_t k = 0; k < m; ++k) {
        hit[k] = spec.hit(j, rest[k]);
        miss[k] = 1.0 - hit[k];
        no_link[k] = 1.0 - spec.beta(j, rest[k]);
        prev_rest[k] = (*prev)[rest[k]];
    }
    const double prev_self = (*prev)[j];

    CompensatedSum base_sum;
    std::vector<CompensatedSum> weight_rest(m);
    CompensatedSum weight_target;
    std::vector<std::size_t> outside;
    std::vector<double> prefix(m + 1), suffix(m + 1);
    outside.reserve(m);

    const std::uint64_t subsets = std::uint64_t{1} << m;
    for (std::uint64_t v = 0; v < subsets; ++v) {
        double a = 1.0;
        double combined = prev_self;
        outside.clear();
        for (std::size_t k = 0; k < m; ++k) {
            if ((v >> k) & 1u) {
                a *= hit[k];
                if (variant == BoundVariant::Lower) {
                    combined = std::max(combined, prev_rest[k]);
                } else {
                    combined += prev_rest[k];
                }
            } else {
                outside.push_back(k);
            }
        }
        if (a == 0.0) continue;
        if (variant == BoundVariant::Upper) combined = std::min(1.0, combined);
        const double scale = a * combined;
        if (scale == 0.0) continue;

        const std::size_t r = outside.size();
        prefix[0] = 1.0;
        for (std::size_t t = 0; t < r; ++t) prefix[t + 1] = prefix[t] * miss[outside[t]];
        suffix[r] = 1.0;
        for (std::size_t t = r; t-- > 0;) suffix[t] = suffix[t + 1] * miss[outside[t]];

        base_sum += scale * prefix[r];
        weight_target += scale * prefix[r];
        for (std::size_t t = 0; t < r; ++t) {
            const std::size_t k = outside[t];
            weight_rest[k] += scale * no_link[k] * prefix[t] * suffix[t + 1];
        }
    }

    // Honey links i->w with w outside {j} u v u u; the target is a legal honeypot location here.
    CompensatedSum recursive;
    recursive += base_sum.value();
    auto apply_capture = [&](NodeIndex w, double weight) {
        const double idle = idle_given_no_link_from(spec, j, w);
        const double per_unit = (1.0 - spec.q(j, w)) * idle * weight;
        recursive += -policy(j, w) * per_unit;
        step.gradient[w] += -(1.0 - direct) * per_unit;
    };
    for (std::size_t k = 0; k < m; ++k) apply_capture(rest[k], weight_rest[k].value());
    apply_capture(j0, weight_target.value());

    step.value = std::clamp(base + (1.0 - direct) * recursive.value(), 0.0, 1.0);
    return step;
}

BoundTable bound_table(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                       BoundVariant variant, std::size_t bounds_cap) {
    const std::size_t n = spec.node_count();
    if (n > bounds_cap) {
        throw Error(ErrorCode::NetworkTooLargeForBounds,
                    "N = " + std::to_string(n) + " exceeds bounds cap " + std::to_string(bounds_cap));
    }
    const NodeIndex j0 = spec.target();
    std::vector<std::vector<double>> rows(delta_k + 1, std::vector<double>(n, 0.0));
    for (NodeIndex j = 0; j < n; ++j) {
        if (j != j0) rows[0][j] = bound_step(spec, policy, j, nullptr, variant).value;
    }
    for (std::size_t d = 1; d <= delta_k; ++d) {
        for (NodeIndex j = 0; j < n; ++j) {
            if (j != j0) rows[d][j] = bound_step(spec, policy, j, &rows[d - 1], variant).value;
        }
    }
    return BoundTable(variant, std::move(rows));
}

namespace {

std::map<NodeIndex, double> dmz_values(const NetworkSpec& spec, const BoundTable& table, std::size_t delta_k) {
    std::map<NodeIndex, double> out;
    spec.dmz().for_each([&](NodeIndex i) { out[i] = table(delta_k, i); });
    return out;
}

}  // namespace

std::map<NodeIndex, double> ltv_lower(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k) {
    return dmz_values(spec, bound_table(spec, policy, delta_k, BoundVariant::Lower), delta_k);
}

std::map<NodeIndex, double> ltv_upper(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k) {
    return dmz_values(spec, bound_table(spec, policy, delta_k, BoundVariant::Upper), delta_k);
}

namespace {

/// Forward propagation of the distribution over compromised sets.
class ExactPropagator {
public:
    ExactPropagator(const NetworkSpec& spec, const PolicyMatrix& policy)
        : spec_(spec), n_(spec.node_count()), j0_(spec.target()), idle_(n_), miss_(n_ * n_) {
        for (NodeIndex w = 0; w < n_; ++w) idle_[w] = idle_prob(spec, w);
        for (NodeIndex a = 0; a < n_; ++a)
            for (NodeIndex h = 0; h < n_; ++h) miss_[a * n_ + h] = 1.0 - spec.hit(a, h);
        capture_.assign(n_ * n_, 0.0);
        for (NodeIndex l = 0; l < n_; ++l)
            for (NodeIndex w = 0; w < n_; ++w)
                if (l != w) capture_[l * n_ + w] = policy(l, w) * (1.0 - spec.q(l, w));
    }

    ExactTrajectory run(NodeSet start, std::size_t delta_k) {
        const std::size_t states = std::size_t{1} << n_;
        std::vector<double> current(states, 0.0);
        current[start.bits()] = 1.0;
        next_.assign(states, 0.0);

        ExactTrajectory out;
        CompensatedSum target_total;
        CompensatedSum detected_total;
        for (std::size_t stage = 0; stage <= delta_k; ++stage) {
            std::fill(next_.begin(), next_.end(), 0.0);
            target_ = CompensatedSum{};
            detected_ = CompensatedSum{};
            for (std::size_t s = 0; s < states; ++s) {
                if (current[s] != 0.0) propagate(NodeSet(s), current[s]);
            }
            current.swap(next_);
            target_total += target_.value();
            detected_total += detected_.value();
            out.target_compromised.push_back(target_total.value());
            out.detected.push_back(detected_total.value());

            CompensatedSum mass;
            for (double p : current) mass += p;
            mass += target_total.value();
            mass += detected_total.value();
            out.max_mass_error = std::max(out.max_mass_error, std::abs(mass.value() - 1.0));
        }
        return out;
    }

private:
    void propagate(NodeSet s, double mass) {
        accumulate(s, s, n_, mass);
        for (NodeIndex w = 0; w < n_; ++w) {
            double c = 0.0;
            s.for_each([&](NodeIndex l) { c += capture_[l * n_ + w]; });
            if (c == 0.0) continue;
            const double caught = mass * c * idle_[w];
            if (caught == 0.0) continue;
            detected_ += caught;
            // Remove the idle-honeypot branch from the undetected outcomes.
            if (s.contains(w)) {
                // w idle: its outbound links are absent, so w launches no attack.
                accumulate(s, s.without(w), n_, -caught);
            } else {
                // w idle: nothing reaches w, so w stays clean.
                accumulate(s, s, w, -caught);
            }
        }
    }

    /// Adds `weight` times the product distribution of new compromises by `attackers`
    /// into next_ (and the target absorbing mass). `forced_clean` is never compromised.
    void accumulate(NodeSet s, NodeSet attackers, NodeIndex forced_clean, double weight) {
        sinks_.clear();
        probs_.clear();
        double target_prob = 0.0;
        for (NodeIndex h = 0; h < n_; ++h) {
            if (s.contains(h)) continue;
            double p = 0.0;
            if (h != forced_clean) {
                double survive = 1.0;
                attackers.for_each([&](NodeIndex a) { survive *= miss_[a * n_ + h]; });
                p = 1.0 - survive;
            }
            if (h == j0_) {
                target_prob = p;
            } else {
                sinks_.push_back(h);
                probs_.push_back(p);
            }
        }
        target_ += weight * target_prob;

        const std::size_t f = sinks_.size();
        dist_.assign(std::size_t{1} << f, 0.0);
        masks_.assign(std::size_t{1} << f, 0);
        dist_[0] = weight * (1.0 - target_prob);
        masks_[0] = s.bits();
        for (std::size_t k = 0; k < f; ++k) {
            const std::size_t half = std::size_t{1} << k;
            const double p = probs_[k];
            const std::uint64_t bit = std::uint64_t{1} << sinks_[k];
            for (std::size_t t = 0; t < half; ++t) {
                dist_[t | half] = dist_[t] * p;
                dist_[t] *= 1.0 - p;
                masks_[t | half] = masks_[t] | bit;
            }
        }
        for (std::size_t t = 0; t < dist_.size(); ++t) next_[masks_[t]] += dist_[t];
    }

    const NetworkSpec& spec_;
    std::size_t n_;
    NodeIndex j0_;
    std::vector<double> idle_;
    std::vector<double> miss_;
    std::vector<double> capture_;
    std::vector<double> next_;
    CompensatedSum target_;
    CompensatedSum detected_;
    std::vector<NodeIndex> sinks_;
    std::vector<double> probs_;
    std::vector<double> dist_;
    std::vector<std::uint64_t> masks_;
};

}  // namespace

ExactTrajectory exact_trajectory(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                                 NodeSet start, std::size_t exact_cap) {
    const std::size_t n = spec.node_count();
    if (n > exact_cap) {
        throw Error(ErrorCode::NetworkTooLargeForExact,
                    "N = " + std::to_string(n) + " exceeds exact cap " + std::to_string(exact_cap));
    }
    if (start.empty() || !start.is_subset_of(spec.all_nodes())) {
        throw Error(ErrorCode::InvalidArgument, "start set must be a non-empty subset of the nodes");
    }
    if (start.contains(spec.target())) throw Error(ErrorCode::InvalidArgument, "start set contains the target");
    return ExactPropagator(spec, policy).run(start, delta_k);
}

std::map<NodeIndex, ExactTrajectory> ltv_exact(const NetworkSpec& spec, const PolicyMatrix& policy,
                                               std::size_t delta_k, std::size_t exact_cap) {
    std::map<NodeIndex, ExactTrajectory> out;
    spec.dmz().for_each(
        [&](NodeIndex i) { out[i] = exact_trajectory(spec, policy, delta_k, NodeSet::single(i), exact_cap); });
    return out;
}

double aggregate_ltv(const NetworkSpec& spec, const std::map<NodeIndex, double>& per_initial) {
    CompensatedSum total;
    spec.dmz().for_each([&](NodeIndex i) {
        const auto it = per_initial.find(i);
        if (it == per_initial.end()) {
            throw Error(ErrorCode::MissingInitialNode, "no value for dmz node " + std::to_string(i));
        }
        total += spec.rho(i) * it->second;
    });
    return total.value();
}

VulnerabilityReport vulnerability_report(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                                         const ReportOptions& options) {
    VulnerabilityReport report;
    report.delta_k = delta_k;
    const BoundTable lower = bound_table(spec, policy, delta_k, BoundVariant::Lower, options.bounds_cap);
    const BoundTable upper = bound_table(spec, policy, delta_k, BoundVariant::Upper, options.bounds_cap);
    std::map<NodeIndex, ExactTrajectory> exact;
    if (!options.bounds_only) exact = ltv_exact(spec, policy, delta_k, options.exact_cap);

    spec.dmz().for_each([&](NodeIndex i) {
        auto& traj = report.per_initial[i];
        for (std::size_t d = 0; d <= delta_k; ++d) {
            VulnerabilityPoint p;
            p.lower = lower(d, i);
            p.upper = upper(d, i);
            if (!options.bounds_only) p.exact = exact.at(i).target_compromised[d];
            traj.push_back(p);
        }
    });
    for (std::size_t d = 0; d <= delta_k; ++d) {
        CompensatedSum e, lo, up;
        for (const auto& [i, traj] : report.per_initial) {
            const double r = spec.rho(i);
            lo += r * traj[d].lower;
            up += r * traj[d].upper;
            if (traj[d].exact) e += r * *traj[d].exact;
        }
        VulnerabilityPoint agg;
        agg.lower = lo.value();
        agg.upper = up.value();
        if (!options.bounds_only) agg.exact = e.value();
        report.aggregate.push_back(agg);
    }
    return report;
}

SecurityCheck check_security_level(const VulnerabilityReport& report, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "threshold must lie in [0, 1]");
    }
    const VulnerabilityPoint& p = report.final_aggregate();
    SecurityCheck check;
    if (p.exact) {
        check.compared_value = *p.exact;
        check.compared_figure = "exact";
    } else {
        check.compared_value = p.upper;
        check.compared_figure = "upper";
    }
    check.secure = check.compared_value <= threshold;
    return check;
}

SandwichDiagnostics sandwich_diagnostics(const VulnerabilityReport& report, double tol) {
    SandwichDiagnostics diag;
    for (const auto& [i, traj] : report.per_initial) {
        for (std::size_t d = 0; d < traj.size(); ++d) {
            const auto& p = traj[d];
            if (!p.exact) continue;
            ++diag.points_checked;
            if (*p.exact < p.lower - tol || *p.exact > p.upper + tol) {
                diag.violations.push_back({i, d, *p.exact, p.lower, p.upper});
            }
        }
    }
    return diag;
}

}  // namespace latmove
