#pragma once

// Hand-built networks used across the unit tests.

#include <string>
#include <vector>

#include "latmove/net_model.hpp"

namespace latmove::testing {

/// Two users U1, U2 in the DMZ and hosts H1, H2, H3 with target H3; users cannot reach H3.
inline RawNetwork fig1_raw() {
    RawNetwork raw = RawNetwork::blank(5);
    const std::vector<std::string> ids = {"U1", "U2", "H1", "H2", "H3"};
    for (std::size_t k = 0; k < 5; ++k) {
        raw.nodes[k].id = ids[k];
        raw.nodes[k].kind = k < 2 ? NodeKind::User : NodeKind::Host;
    }
    raw.dmz = {0, 1};
    raw.reconfigurable = {0, 1, 2, 3};
    raw.target = 4;
    raw.beta[0][2] = 0.6;
    raw.beta[0][3] = 0.3;
    raw.beta[1][3] = 0.5;
    raw.beta[2][3] = 0.4;
    raw.beta[3][2] = 0.2;
    raw.beta[2][4] = 0.5;
    raw.beta[3][4] = 0.3;
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            if (i == j) continue;
            raw.lambda[i][j] = 0.7;
            raw.q[i][j] = 0.2;
        }
    }
    raw.rho[0] = 0.5;
    raw.rho[1] = 0.5;
    return raw;
}

inline NetworkSpec fig1_network() { return validate_network(fig1_raw()); }

/// Chain a -> b -> t plus an isolated spare node s. DMZ {a}, target t, reconfigurable {b, s}.
inline RawNetwork chain_raw(double beta_ab, double lambda_ab, double beta_bt, double lambda_bt) {
    RawNetwork raw = RawNetwork::blank(4);
    const std::vector<std::string> ids = {"a", "b", "t", "s"};
    for (std::size_t k = 0; k < 4; ++k) raw.nodes[k].id = ids[k];
    raw.dmz = {0};
    raw.reconfigurable = {1, 3};
    raw.target = 2;
    raw.beta[0][1] = beta_ab;
    raw.lambda[0][1] = lambda_ab;
    raw.beta[1][2] = beta_bt;
    raw.lambda[1][2] = lambda_bt;
    raw.rho[0] = 1.0;
    return raw;
}

inline NetworkSpec chain_network(double beta_ab, double lambda_ab, double beta_bt, double lambda_bt) {
    return validate_network(chain_raw(beta_ab, lambda_ab, beta_bt, lambda_bt));
}

/// Honey link s -> b on the chain: its source is never compromised, so it never detects.
inline PolicyMatrix inert_chain_policy(const NetworkSpec& chain) {
    return PolicyMatrix::deterministic(chain, Link{3, 1});
}

}  // namespace latmove::testing
