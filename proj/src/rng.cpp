#include "latmove/rng.hpp"

#include "latmove/core.hpp"

namespace latmove {

std::size_t RandomStream::categorical(std::span<const double> weights) {
    CompensatedSum total;
    for (double w : weights) total += w;
    const double target = uniform() * total.value();
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] <= 0.0) continue;
        last_positive = k;
        acc += weights[k];
        if (target < acc) return k;
    }
    return last_positive;
}

}  // namespace latmove
