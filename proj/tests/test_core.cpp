#include <doctest.h>

#include <array>
#include <cmath>
#include <set>

#include "latmove/core.hpp"
#include "latmove/errors.hpp"
#include "latmove/rng.hpp"

using namespace latmove;

TEST_CASE("node set basics") {
    NodeSet s{1, 4, 7};
    CHECK(s.size() == 3);
    CHECK(s.contains(4));
    CHECK_FALSE(s.contains(2));
    CHECK(s.members() == std::vector<NodeIndex>{1, 4, 7});
    CHECK(s.without(4).with(2) == NodeSet{1, 2, 7});
    CHECK((s - NodeSet{1}) == NodeSet{4, 7});
    CHECK(NodeSet{4}.is_subset_of(s));
    CHECK(NodeSet::all(64).size() == 64);
    CHECK(NodeSet::all(3) == NodeSet{0, 1, 2});
    CHECK_FALSE(s.contains(200));
}

TEST_CASE("compensated sum beats naive accumulation") {
    CompensatedSum c;
    double naive = 0.0;
    c += 1.0;
    naive += 1.0;
    for (int k = 0; k < 1000000; ++k) {
        c += 1e-16;
        naive += 1e-16;
    }
    CHECK(naive == 1.0);
    CHECK(c.value() == doctest::Approx(1.0 + 1e-10).epsilon(1e-15));
}

TEST_CASE("matrix helpers") {
    Matrix a(3);
    a(0, 1) = 0.25;
    a(Link{2, 0}) = 0.75;
    CHECK(a.sum() == 1.0);
    Matrix b = a;
    b(1, 2) = 0.5;
    CHECK(Matrix::max_abs_diff(a, b) == 0.5);
}

TEST_CASE("error messages carry the code name") {
    const Error e(ErrorCode::RhoNotNormalized, "sum 0.9");
    CHECK(std::string(e.what()) == "RhoNotNormalized: sum 0.9");
    const ValidationError v({{ErrorCode::TargetInDmz, "x"}, {ErrorCode::EmptyDmz, "y"}});
    CHECK(v.has(ErrorCode::EmptyDmz));
    CHECK_FALSE(v.has(ErrorCode::NonSquareMatrix));
}

TEST_CASE("streams are pure functions of their key") {
    RandomStream a({42, StreamPurpose::Attack, 3, 17});
    RandomStream b({42, StreamPurpose::Attack, 3, 17});
    for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
    CHECK(a.draws() == 100);

    std::set<std::uint64_t> firsts;
    for (std::uint64_t seed : {0ull, 1ull})
        for (auto purpose : {StreamPurpose::StageLinks, StreamPurpose::Attack, StreamPurpose::Initial})
            for (std::uint64_t stage : {0ull, 1ull})
                for (std::uint64_t trial : {0ull, 1ull, 2ull}) firsts.insert(RandomStream({seed, purpose, stage, trial}).next_u64());
    CHECK(firsts.size() == 2 * 3 * 2 * 3);
}

TEST_CASE("splitmix64 reference values") {
    // First outputs of the SplitMix64 generator seeded with 0.
    std::uint64_t state = 0;
    auto next = [&] {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    CHECK(next() == 0xE220A8397B1DCDAFULL);
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
    CHECK(next() == splitmix64(0x9E3779B97F4A7C15ULL));
}

TEST_CASE("uniform and bernoulli statistics") {
    RandomStream s({7, StreamPurpose::Synthetic, 0, 0});
    const int n = 200000;
    double sum = 0.0;
    int hits = 0;
    for (int k = 0; k < n; ++k) {
        const double u = s.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
        if (s.bernoulli(0.3)) ++hits;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.005);
    CHECK(std::abs(static_cast<double>(hits) / n - 0.3) < 0.005);
    CHECK_FALSE(s.bernoulli(0.0));
    CHECK(s.bernoulli(1.0));
}

TEST_CASE("categorical draws follow the weights") {
    RandomStream s({9, StreamPurpose::Synthetic, 0, 0});
    const std::array<double, 4> w = {0.0, 1.0, 0.0, 3.0};
    std::array<int, 4> counts{};
    const int n = 100000;
    for (int k = 0; k < n; ++k) ++counts[s.categorical(w)];
    CHECK(counts[0] == 0);
    CHECK(counts[2] == 0);
    CHECK(std::abs(counts[3] / static_cast<double>(n) - 0.75) < 0.01);
}
