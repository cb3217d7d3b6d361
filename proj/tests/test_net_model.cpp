#include <doctest.h>

#include <cmath>

#include "latmove/errors.hpp"
#include "latmove/net_model.hpp"
#include "support/fixtures.hpp"
#include "support/instances.hpp"

using namespace latmove;
using namespace latmove::testing;

namespace {

ValidationError violations_of(const RawNetwork& raw) {
    try {
        validate_network(raw);
    } catch (const ValidationError& e) {
        return e;
    }
    FAIL("expected a validation error");
    return ValidationError({});
}

}  // namespace

TEST_CASE("fig1-style network validates") {
    const NetworkSpec spec = fig1_network();
    CHECK(spec.node_count() == 5);
    CHECK(spec.dmz() == NodeSet{0, 1});
    CHECK(spec.target() == 4);
    CHECK(spec.beta(0, 4) == 0.0);
    CHECK(spec.beta(1, 4) == 0.0);
    CHECK(validate_network(spec.to_raw()) == spec);
}

TEST_CASE("rho summing to 0.9 is rejected") {
    RawNetwork raw = fig1_raw();
    raw.rho[1] = 0.4;
    const auto e = violations_of(raw);
    CHECK(e.has(ErrorCode::RhoNotNormalized));
    CHECK(std::string(e.what()).find("0.9") != std::string::npos);
}

TEST_CASE("target in the dmz is rejected") {
    RawNetwork raw = fig1_raw();
    raw.dmz.push_back(4);
    CHECK(violations_of(raw).has(ErrorCode::TargetInDmz));
}

TEST_CASE("every violation is reported at once") {
    RawNetwork raw = fig1_raw();
    raw.beta[0][2] = 1.5;
    raw.lambda[1][1] = 0.3;
    raw.beta.pop_back();
    raw.rho[0] = 0.0;
    const auto e = violations_of(raw);
    CHECK(e.has(ErrorCode::NonSquareMatrix));
    CHECK(e.has(ErrorCode::RhoNotNormalized));
    CHECK(e.violations().size() >= 2);
}

TEST_CASE("other structural violations") {
    SUBCASE("empty dmz") {
        RawNetwork raw = fig1_raw();
        raw.dmz.clear();
        raw.rho.assign(5, 0.0);
        CHECK(violations_of(raw).has(ErrorCode::EmptyDmz));
    }
    SUBCASE("probability out of range") {
        RawNetwork raw = fig1_raw();
        raw.q[0][2] = -0.1;
        CHECK(violations_of(raw).has(ErrorCode::ProbabilityOutOfRange));
    }
    SUBCASE("nonzero diagonal") {
        RawNetwork raw = fig1_raw();
        raw.beta[2][2] = 0.1;
        CHECK(violations_of(raw).has(ErrorCode::NonZeroDiagonal));
    }
    SUBCASE("rho outside the dmz") {
        RawNetwork raw = fig1_raw();
        raw.rho = {0.5, 0.25, 0.25, 0.0, 0.0};
        CHECK(violations_of(raw).has(ErrorCode::RhoOutsideDmz));
    }
    SUBCASE("duplicate ids") {
        RawNetwork raw = fig1_raw();
        raw.nodes[3].id = "H1";
        CHECK(violations_of(raw).has(ErrorCode::DuplicateNode));
    }
}

TEST_CASE("tiny round-off is clamped with a warning") {
    RawNetwork raw = fig1_raw();
    raw.beta[0][2] = 1.0 + 5e-13;
    raw.q[1][0] = -5e-13;
    std::vector<std::string> warnings;
    const NetworkSpec spec = validate_network(raw, &warnings);
    CHECK(spec.beta(0, 2) == 1.0);
    CHECK(spec.q(1, 0) == 0.0);
    CHECK(warnings.size() == 2);
}

TEST_CASE("q diagonal is forced to zero") {
    RawNetwork raw = fig1_raw();
    raw.q[2][2] = 0.7;
    CHECK(validate_network(raw).q(2, 2) == 0.0);
}

TEST_CASE("policy invariants") {
    const NetworkSpec spec = fig1_network();
    const LinkMask mask = feasible_mask(spec);
    CHECK_FALSE(mask(4, 0));  // never sourced at the target
    CHECK_FALSE(mask(0, 4));  // target not reconfigurable
    CHECK_FALSE(mask(2, 2));
    CHECK(mask(4 - 1, 2));

    const PolicyMatrix u = PolicyMatrix::uniform(spec);
    CHECK(u.gamma().sum() == doctest::Approx(1.0).epsilon(1e-15));
    for (const Link& l : mask.links()) CHECK(u(l.source, l.sink) == doctest::Approx(1.0 / mask.count()));

    Matrix bad(5);
    bad(4, 2) = 1.0;
    CHECK_THROWS_AS(PolicyMatrix::for_network(spec, bad), ValidationError);
    Matrix half(5);
    half(0, 2) = 0.5;
    CHECK_THROWS_AS(PolicyMatrix::from_distribution(half), Error);
    CHECK_THROWS_AS(PolicyMatrix::uniform_over(LinkMask(5)), Error);
}

TEST_CASE("sample_stage") {
    const NetworkSpec chain = chain_network(0.0, 1.0, 0.0, 1.0);
    SUBCASE("zero beta gives no links for any seed") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            RandomStream s({seed, StreamPurpose::StageLinks, 0, 0});
            const StageRealization r = sample_stage(chain, inert_chain_policy(chain), s);
            for (const NodeSet& out : r.out_links) CHECK(out.empty());
        }
    }
    SUBCASE("deterministic policy gives its link") {
        const NetworkSpec spec = fig1_network();
        const PolicyMatrix p = PolicyMatrix::deterministic(spec, Link{1, 2});
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            RandomStream s({seed, StreamPurpose::StageLinks, 0, 0});
            CHECK(sample_stage(spec, p, s).honey_link == Link{1, 2});
        }
    }
    SUBCASE("link frequency matches beta") {
        const NetworkSpec spec = chain_network(0.5, 1.0, 0.0, 1.0);
        const PolicyMatrix p = inert_chain_policy(spec);
        int hits = 0;
        const int n = 100000;
        for (int k = 0; k < n; ++k) {
            RandomStream s({3, StreamPurpose::StageLinks, 0, static_cast<std::uint64_t>(k)});
            hits += sample_stage(spec, p, s).has_link(0, 1) ? 1 : 0;
        }
        CHECK(std::abs(hits / static_cast<double>(n) - 0.5) < 0.01);
    }
    SUBCASE("bit-reproducible") {
        const NetworkSpec spec = random_network(11, {});
        const PolicyMatrix p = random_policy(spec, 3);
        RandomStream s1({5, StreamPurpose::StageLinks, 2, 9});
        RandomStream s2({5, StreamPurpose::StageLinks, 2, 9});
        const auto a = sample_stage(spec, p, s1, 2);
        const auto b = sample_stage(spec, p, s2, 2);
        CHECK(a.out_links == b.out_links);
        CHECK(a.honey_link == b.honey_link);
        CHECK(a.stage == 2);
    }
}

TEST_CASE("is_idle") {
    StageRealization r = StageRealization::empty(4);
    CHECK(is_idle(r, 0));
    r.add_link(0, 1);
    CHECK(is_idle(r, 2));
    CHECK_FALSE(is_idle(r, 1));
    CHECK_FALSE(is_idle(r, 0));
    CHECK_THROWS_AS(is_idle(r, 4), Error);
}

TEST_CASE("no_interference_prob") {
    RawNetwork raw = RawNetwork::blank(4);
    raw.dmz = {0};
    raw.reconfigurable = {1, 2};
    raw.target = 3;
    raw.rho[0] = 1.0;
    SUBCASE("zero beta") {
        const NetworkSpec spec = validate_network(raw);
        CHECK(no_interference_prob(spec, NodeSet{0, 1}, 2, NodeSet{3}) == 1.0);
    }
    SUBCASE("hand evaluation") {
        raw.beta[1][2] = 0.5;
        raw.beta[2][3] = 0.25;
        const NetworkSpec spec = validate_network(raw);
        CHECK(no_interference_prob(spec, NodeSet{1}, 2, NodeSet{3}) == doctest::Approx(0.375));
        CHECK(no_interference_prob(spec, NodeSet{}, 2, NodeSet{}) == 1.0);
        CHECK_THROWS_AS(no_interference_prob(spec, NodeSet{2}, 2, NodeSet{}), Error);
    }
    SUBCASE("certain interference") {
        raw.beta[0][2] = 1.0;
        const NetworkSpec spec = validate_network(raw);
        CHECK(no_interference_prob(spec, NodeSet{0, 1}, 2, NodeSet{}) == 0.0);
    }
}

TEST_CASE("idleness frequency converges to idle_prob") {
    const NetworkSpec spec = random_network(21, {.nodes = 5, .dmz_size = 1, .link_density = 0.5, .beta_max = 0.5});
    const PolicyMatrix p = PolicyMatrix::uniform(spec);
    const int n = 100000;
    for (NodeIndex w = 0; w < 5; ++w) {
        int idle = 0;
        for (int k = 0; k < n; ++k) {
            RandomStream s({1, StreamPurpose::StageLinks, 0, static_cast<std::uint64_t>(k)});
            idle += is_idle(sample_stage(spec, p, s), w) ? 1 : 0;
        }
        const double expected = idle_prob(spec, w);
        CHECK(expected == doctest::Approx(no_interference_prob(spec, spec.all_nodes().without(w), w,
                                                               spec.all_nodes().without(w))));
        const double sigma = std::sqrt(expected * (1 - expected) / n);
        CHECK(std::abs(idle / static_cast<double>(n) - expected) <= 4 * sigma + 1e-12);
    }
}

TEST_CASE("no_interference_prob shrinks as sets grow") {
    const NetworkSpec spec = random_network(5, {.nodes = 6});
    const NodeSet all = spec.all_nodes();
    for (NodeIndex w = 0; w < 6; ++w) {
        const NodeSet others = all.without(w);
        double prev = 1.0;
        NodeSet v;
        for (NodeIndex l : others.members()) {
            v.insert(l);
            const double now = no_interference_prob(spec, v, w, NodeSet{});
            CHECK(now <= prev);
            prev = now;
        }
    }
}
