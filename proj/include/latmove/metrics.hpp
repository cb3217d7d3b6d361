#pragma once

// Policy quality metrics: probability of interference (PoI), stealthiness
// level (SL) and cost of roaming (CoR).

#include <functional>
#include <optional>

#include "latmove/core.hpp"
#include "latmove/net_model.hpp"

namespace latmove {

/// Cost of switching from one honey link to another. Non-negative.
class CostTable {
public:
    using Function = std::function<double(Link from, Link to)>;

    /// All-zero cost.
    CostTable() = default;
    /// Location-only cost: C((h1,w1),(h2,w2)) = D(w1,w2). D must be square, non-negative, zero diagonal.
    static CostTable location(Matrix distance);
    /// General four-index cost.
    static CostTable general(Function f);

    double operator()(Link from, Link to) const;
    bool is_zero() const { return !location_ && !general_; }
    const std::optional<Matrix>& location_matrix() const { return location_; }

private:
    std::optional<Matrix> location_;
    Function general_;
};

/// How interference weights enter the cost of roaming.
enum class CorWeighting {
    Paper,  ///< each factor weighted by its interference probability, as printed
    Plain,  ///< sum of gamma * gamma' * C
};

/// 1 - Pr(w idle): the chance a honeypot placed on w interferes with a service link.
double interference_factor(const NetworkSpec& spec, NodeIndex w);

double probability_of_interference(const NetworkSpec& spec, const PolicyMatrix& policy);

/// Shannon entropy -sum gamma ln gamma (natural log, 0 ln 0 = 0). Higher means stealthier.
double stealthiness(const PolicyMatrix& policy);
double stealthiness(const Matrix& gamma);

double cost_of_roaming(const NetworkSpec& spec, const PolicyMatrix& policy, const CostTable& costs,
                       CorWeighting weighting = CorWeighting::Paper);

}  // namespace latmove
