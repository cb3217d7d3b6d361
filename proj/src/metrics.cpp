#include "latmove/metrics.hpp"

#include <cmath>

#include "latmove/errors.hpp"

namespace latmove {

CostTable CostTable::location(Matrix distance) {
    std::vector<Violation> violations;
    for (std::size_t a = 0; a < distance.size(); ++a) {
        for (std::size_t b = 0; b < distance.size(); ++b) {
            const double d = distance(a, b);
            if (!(d >= 0.0) || !std::isfinite(d)) {
                violations.push_back({ErrorCode::InvalidArgument,
                                      "D[" + std::to_string(a) + "][" + std::to_string(b) + "] must be finite and >= 0"});
            }
        }
        if (distance(a, a) != 0.0) {
            violations.push_back({ErrorCode::NonZeroDiagonal, "D[" + std::to_string(a) + "][" + std::to_string(a) + "] must be 0"});
        }
    }
    if (!violations.empty()) throw ValidationError(std::move(violations));
    CostTable t;
    t.location_ = std::move(distance);
    return t;
}

CostTable CostTable::general(Function f) {
    CostTable t;
    t.general_ = std::move(f);
    return t;
}

double CostTable::operator()(Link from, Link to) const {
    if (location_) return (*location_)(from.sink, to.sink);
    if (general_) return general_(from, to);
    return 0.0;
}

double interference_factor(const NetworkSpec& spec, NodeIndex w) { return 1.0 - idle_prob(spec, w); }

double probability_of_interference(const NetworkSpec& spec, const PolicyMatrix& policy) {
    const std::size_t n = spec.node_count();
    CompensatedSum total;
    for (std::size_t w = 0; w < n; ++w) {
        CompensatedSum column;
        for (std::size_t h = 0; h < n; ++h) {
            if (h != w) column += policy(h, w);
        }
        if (column.value() != 0.0) total += interference_factor(spec, w) * column.value();
    }
    return std::clamp(total.value(), 0.0, 1.0);
}

double stealthiness(const Matrix& gamma) {
    CompensatedSum h;
    for (double g : gamma.values()) {
        if (g > 0.0) h += -g * std::log(g);
    }
    return std::max(0.0, h.value());
}

double stealthiness(const PolicyMatrix& policy) { return stealthiness(policy.gamma()); }

double cost_of_roaming(const NetworkSpec& spec, const PolicyMatrix& policy, const CostTable& costs,
                       CorWeighting weighting) {
    if (costs.is_zero()) return 0.0;
    const std::size_t n = spec.node_count();
    std::vector<double> factor(n, 1.0);
    if (weighting == CorWeighting::Paper) {
        for (std::size_t w = 0; w < n; ++w) factor[w] = interference_factor(spec, w);
    }
    struct Weighted {
        Link link;
        double weight;
    };
    std::vector<Weighted> support;
    for (std::size_t h = 0; h < n; ++h) {
        for (std::size_t w = 0; w < n; ++w) {
            const double g = policy(h, w);
            if (g > 0.0 && h != w) support.push_back({{h, w}, g * factor[w]});
        }
    }
    CompensatedSum total;
    for (const auto& a : support) {
        for (const auto& b : support) {
            total += a.weight * b.weight * costs(a.link, b.link);
        }
    }
    return std::max(0.0, total.value());
}

}  // namespace latmove
