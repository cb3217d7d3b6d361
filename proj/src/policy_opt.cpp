#include "latmove/policy_opt.hpp"

#include <cmath>
#include <limits>

namespace latmove {

void ObjectiveWeights::validate() const {
    for (double a : {alpha_poi, alpha_sl, alpha_cor}) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw Error(ErrorCode::InvalidArgument, "objective weights must be finite and non-negative");
        }
    }
}

const char* to_string(PolicyVariant variant) {
    return variant == PolicyVariant::Risky ? "risky" : "conservative";
}

BoundVariant bound_for(PolicyVariant variant) {
    return variant == PolicyVariant::Risky ? BoundVariant::Lower : BoundVariant::Upper;
}

namespace {

const CostTable& costs_of(const ObjectiveContext& context) {
    static const CostTable zero;
    return context.costs ? *context.costs : zero;
}

double aggregate_vulnerability(const NetworkSpec& spec, const PolicyMatrix& policy, std::size_t delta_k,
                               LtvVariant variant, const ObjectiveContext& context) {
    if (variant == LtvVariant::Exact) {
        const auto exact = ltv_exact(spec, policy, delta_k, context.exact_cap);
        std::map<NodeIndex, double> finals;
        for (const auto& [i, traj] : exact) finals[i] = traj.target_compromised.back();
        return aggregate_ltv(spec, finals);
    }
    const BoundVariant bound = variant == LtvVariant::Lower ? BoundVariant::Lower : BoundVariant::Upper;
    const BoundTable table = bound_table(spec, policy, delta_k, bound, context.bounds_cap);
    CompensatedSum total;
    spec.dmz().for_each([&](NodeIndex i) { total += spec.rho(i) * table(delta_k, i); });
    return total.value();
}

}  // namespace

double objective(const NetworkSpec& spec, const PolicyMatrix& policy, const ObjectiveWeights& weights,
                 std::size_t delta_k, LtvVariant variant, const ObjectiveContext& context) {
    weights.validate();
    double value = aggregate_vulnerability(spec, policy, delta_k, variant, context);
    if (weights.alpha_poi != 0.0) value += weights.alpha_poi * probability_of_interference(spec, policy);
    if (weights.alpha_sl != 0.0) value -= weights.alpha_sl * stealthiness(policy);
    if (weights.alpha_cor != 0.0) {
        value += weights.alpha_cor * cost_of_roaming(spec, policy, costs_of(context), context.cor_weighting);
    }
    return value;
}

Matrix linearized_coefficients(const NetworkSpec& spec, const PolicyMatrix& gamma_t, const ObjectiveWeights& weights,
                               std::size_t delta_k, BoundVariant variant, const ObjectiveContext& context) {
    weights.validate();
    const std::size_t n = spec.node_count();
    Matrix c(n);

    // Vulnerability surrogate: affine in gamma once the previous horizon is frozen.
    std::optional<BoundTable> table;
    if (delta_k > 0) table = bound_table(spec, gamma_t, delta_k - 1, variant, context.bounds_cap);
    spec.dmz().for_each([&](NodeIndex i) {
        const double r = spec.rho(i);
        if (r == 0.0) return;
        const RecursionStep step =
            bound_step(spec, gamma_t, i, table ? &table->row(delta_k - 1) : nullptr, variant);
        for (NodeIndex w = 0; w < n; ++w) c(i, w) += r * step.gradient[w];
    });

    std::vector<double> interference(n);
    for (NodeIndex w = 0; w < n; ++w) interference[w] = interference_factor(spec, w);

    if (weights.alpha_poi != 0.0) {
        for (NodeIndex l = 0; l < n; ++l)
            for (NodeIndex w = 0; w < n; ++w)
                if (l != w) c(l, w) += weights.alpha_poi * interference[w];
    }

    const CostTable& costs = costs_of(context);
    if (weights.alpha_cor != 0.0 && !costs.is_zero()) {
        // The "from" factor is frozen at gamma_t: expected cost of moving from the
        // current deployment distribution to link (l, w).
        std::vector<double> factor(n, 1.0);
        if (context.cor_weighting == CorWeighting::Paper) factor = interference;
        std::vector<std::pair<Link, double>> from;
        for (NodeIndex h = 0; h < n; ++h)
            for (NodeIndex w = 0; w < n; ++w)
                if (h != w && gamma_t(h, w) > 0.0) from.push_back({{h, w}, gamma_t(h, w) * factor[w]});
        for (NodeIndex l = 0; l < n; ++l) {
            for (NodeIndex w = 0; w < n; ++w) {
                if (l == w) continue;
                CompensatedSum s;
                for (const auto& [link, weight] : from) s += weight * costs(link, Link{l, w});
                c(l, w) += weights.alpha_cor * factor[w] * s.value();
            }
        }
    }
    return c;
}

PolicyMatrix gibbs_step(const Matrix& c, double alpha_sl, const LinkMask& feasible) {
    if (!(alpha_sl >= 0.0) || !std::isfinite(alpha_sl)) {
        throw Error(ErrorCode::InvalidArgument, "alpha_sl must be finite and non-negative");
    }
    if (c.size() != feasible.size()) throw Error(ErrorCode::InvalidArgument, "coefficient and mask sizes differ");
    const std::vector<Link> links = feasible.links();
    if (links.empty()) throw Error(ErrorCode::EmptyFeasibleSet, "no feasible honey link");

    Matrix gamma(c.size());
    if (alpha_sl == 0.0) {
        Link best = links.front();
        for (const Link& l : links) {
            if (c(l) < c(best)) best = l;
        }
        gamma(best) = 1.0;
        return PolicyMatrix::from_distribution(std::move(gamma));
    }

    double lowest = std::numeric_limits<double>::infinity();
    for (const Link& l : links) lowest = std::min(lowest, c(l));
    CompensatedSum total;
    for (const Link& l : links) {
        const double e = std::exp(-(c(l) - lowest) / alpha_sl);
        gamma(l) = e;
        total += e;
    }
    const double z = total.value();
    for (const Link& l : links) gamma(l) /= z;
    return PolicyMatrix::from_distribution(std::move(gamma));
}

OptimizationResult optimize(const NetworkSpec& spec, const ObjectiveWeights& weights, std::size_t delta_k,
                            PolicyVariant variant, const OptimizeOptions& options) {
    weights.validate();
    if (!(options.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be > 0");
    if (options.max_iter == 0) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");

    const LinkMask feasible = feasible_mask(spec);
    const BoundVariant bound = bound_for(variant);
    const LtvVariant ltv = variant == PolicyVariant::Risky ? LtvVariant::Lower : LtvVariant::Upper;

    PolicyMatrix current = options.initial ? *options.initial : PolicyMatrix::uniform_over(feasible);
    validate_policy(spec, current);

    OptimizationResult result;
    OptimizationTrace& trace = result.trace;
    trace.iterates.push_back(current);
    trace.objective_values.push_back(objective(spec, current, weights, delta_k, ltv, options.context));

    for (std::size_t t = 0; t < options.max_iter; ++t) {
        const Matrix c = linearized_coefficients(spec, current, weights, delta_k, bound, options.context);
        PolicyMatrix next = gibbs_step(c, weights.alpha_sl, feasible);
        const double step = Matrix::max_abs_diff(next.gamma(), current.gamma());
        current = std::move(next);
        trace.iterates.push_back(current);
        trace.objective_values.push_back(objective(spec, current, weights, delta_k, ltv, options.context));
        trace.step_norms.push_back(step);
        trace.iterations_used = t + 1;
        if (step <= options.epsilon) {
            trace.converged = true;
            break;
        }
    }
    result.policy = current;
    return result;
}

DidNotConverge::DidNotConverge(OptimizationResult result)
    : Error(ErrorCode::DidNotConverge,
            "no convergence after " + std::to_string(result.trace.iterations_used) + " iterations (last step " +
                (result.trace.step_norms.empty() ? std::string("n/a")
                                                 : std::to_string(result.trace.step_norms.back())) +
                ")"),
      result_(std::move(result)) {}

void require_converged(const OptimizationResult& result) {
    if (!result.trace.converged) throw DidNotConverge(result);
}

}  // namespace latmove
