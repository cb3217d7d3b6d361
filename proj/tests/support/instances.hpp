#pragma once

// Seeded random networks and policies for property and acceptance tests.
// Uses the library's counter-based stream, so instances are identical on every platform.

#include <cstdint>

#include "latmove/errors.hpp"
#include "latmove/net_model.hpp"
#include "latmove/rng.hpp"

namespace latmove::testing {

struct InstanceShape {
    std::size_t nodes = 5;
    std::size_t dmz_size = 1;
    double link_density = 0.6;
    double beta_max = 0.8;
    double q_max = 0.6;
};

inline NetworkSpec random_network(std::uint64_t seed, const InstanceShape& shape) {
    RandomStream s({seed, StreamPurpose::Synthetic, 0, 0});
    const std::size_t n = shape.nodes;
    RawNetwork raw = RawNetwork::blank(n);
    for (std::size_t i = 0; i < n; ++i) raw.nodes[i].kind = i < shape.dmz_size ? NodeKind::User : NodeKind::Host;
    raw.target = n - 1;
    for (std::size_t i = 0; i < shape.dmz_size; ++i) raw.dmz.push_back(i);
    for (std::size_t i = 0; i + 1 < n; ++i) raw.reconfigurable.push_back(i);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (s.bernoulli(shape.link_density)) raw.beta[i][j] = shape.beta_max * s.uniform();
            raw.lambda[i][j] = 0.2 + 0.8 * s.uniform();
            raw.q[i][j] = shape.q_max * s.uniform();
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < shape.dmz_size; ++i) total += raw.rho[i] = 0.1 + s.uniform();
    for (std::size_t i = 0; i < shape.dmz_size; ++i) raw.rho[i] /= total;
    return validate_network(raw);
}

/// Random feasible policy; roughly a third of the feasible links get zero weight.
inline PolicyMatrix random_policy(const NetworkSpec& spec, std::uint64_t seed) {
    RandomStream s({seed, StreamPurpose::Synthetic, 1, 0});
    const LinkMask mask = feasible_mask(spec);
    Matrix g(spec.node_count());
    double total = 0.0;
    for (const Link& l : mask.links()) {
        if (s.uniform() < 0.33) continue;
        total += g(l) = s.uniform() + 1e-3;
    }
    if (total == 0.0) return PolicyMatrix::uniform(spec);
    for (double& v : g.values()) v /= total;
    return PolicyMatrix::for_network(spec, g);
}

/// Random feasible policy with zero weight on every honey link sourced at a DMZ node.
inline PolicyMatrix random_indirect_policy(const NetworkSpec& spec, std::uint64_t seed) {
    RandomStream s({seed, StreamPurpose::Synthetic, 2, 0});
    LinkMask mask = feasible_mask(spec);
    Matrix g(spec.node_count());
    double total = 0.0;
    for (const Link& l : mask.links()) {
        if (spec.dmz().contains(l.source)) continue;
        total += g(l) = s.uniform() + 1e-3;
    }
    if (total == 0.0) throw Error(ErrorCode::EmptyFeasibleSet, "no honey link outside the dmz");
    for (double& v : g.values()) v /= total;
    return PolicyMatrix::for_network(spec, g);
}

}  // namespace latmove::testing
