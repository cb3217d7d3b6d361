#pragma once

// Honeypot policy synthesis by iterated entropy-regularized linear subproblems.
//
// Each iteration evaluates the chosen vulnerability surrogate at the current
// policy, freezes the previous-horizon table, linearizes every non-entropy term
// in gamma and solves the regularized subproblem in closed form (a Gibbs
// distribution over the feasible honey links).

#include <optional>
#include <vector>

#include "latmove/errors.hpp"
#include "latmove/ltv_core.hpp"
#include "latmove/metrics.hpp"
#include "latmove/net_model.hpp"

namespace latmove {

struct ObjectiveWeights {
    double alpha_poi = 0.0;
    double alpha_sl = 0.0;
    double alpha_cor = 0.0;

    /// Throws InvalidArgument on a negative or non-finite weight.
    void validate() const;
};

enum class LtvVariant { Exact, Lower, Upper };

/// Risky minimizes the lower-bound surrogate, conservative the upper-bound one.
enum class PolicyVariant { Risky, Conservative };

const char* to_string(PolicyVariant variant);
BoundVariant bound_for(PolicyVariant variant);

struct ObjectiveContext {
    const CostTable* costs = nullptr;  ///< null means all-zero costs
    CorWeighting cor_weighting = CorWeighting::Paper;
    std::size_t exact_cap = kDefaultExactCap;
    std::size_t bounds_cap = kDefaultBoundsCap;
};

/// Aggregate vulnerability + alpha_poi * PoI - alpha_sl * SL + alpha_cor * CoR.
double objective(const NetworkSpec& spec, const PolicyMatrix& policy, const ObjectiveWeights& weights,
                 std::size_t delta_k, LtvVariant variant, const ObjectiveContext& context = {});

/// Coefficients c with non-entropy subproblem objective = sum c * gamma + const, taken at gamma_t.
Matrix linearized_coefficients(const NetworkSpec& spec, const PolicyMatrix& gamma_t, const ObjectiveWeights& weights,
                               std::size_t delta_k, BoundVariant variant, const ObjectiveContext& context = {});

/// argmin over the feasible simplex of sum c * gamma + alpha_sl * sum gamma ln gamma.
/// alpha_sl = 0 selects the smallest coefficient, ties to the lowest (l, w) in row-major order.
PolicyMatrix gibbs_step(const Matrix& c, double alpha_sl, const LinkMask& feasible);

struct OptimizationTrace {
    std::vector<PolicyMatrix> iterates;
    /// Objective (with the variant's bound) at each iterate.
    std::vector<double> objective_values;
    /// Infinity-norm of successive iterate differences; one shorter than iterates.
    std::vector<double> step_norms;
    bool converged = false;
    std::size_t iterations_used = 0;
};

struct OptimizationResult {
    PolicyMatrix policy;
    OptimizationTrace trace;
};

struct OptimizeOptions {
    double epsilon = 1e-6;
    std::size_t max_iter = 200;
    /// Defaults to the uniform policy over the feasible links.
    std::optional<PolicyMatrix> initial;
    ObjectiveContext context;
};

/// Runs to convergence or max_iter. Non-convergence is reported through trace.converged;
/// call require_converged() to turn it into a DidNotConverge exception.
OptimizationResult optimize(const NetworkSpec& spec, const ObjectiveWeights& weights, std::size_t delta_k,
                            PolicyVariant variant, const OptimizeOptions& options = {});

class DidNotConverge : public Error {
public:
    explicit DidNotConverge(OptimizationResult result);
    const OptimizationResult& result() const noexcept { return result_; }

private:
    OptimizationResult result_;
};

void require_converged(const OptimizationResult& result);

}  // namespace latmove
