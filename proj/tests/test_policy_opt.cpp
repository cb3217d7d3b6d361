#include <doctest.h>

#include <cmath>
#include <limits>

#include "latmove/errors.hpp"
#include "latmove/ltv_core.hpp"
#include "latmove/metrics.hpp"
#include "latmove/policy_opt.hpp"
#include "support/fixtures.hpp"
#include "support/instances.hpp"

using namespace latmove;
using namespace latmove::testing;

namespace {

LinkMask first_links(std::size_t n, std::size_t count) {
    LinkMask mask(n);
    std::size_t added = 0;
    for (NodeIndex l = 0; l < n && added < count; ++l)
        for (NodeIndex w = 0; w < n && added < count; ++w)
            if (l != w) {
                mask.set(l, w, true);
                ++added;
            }
    return mask;
}

double subproblem(const Matrix& c, double alpha, const Matrix& gamma, const LinkMask& mask) {
    double total = 0.0;
    for (const Link& e : mask.links()) {
        const double g = gamma(e);
        total += c(e) * g + (g > 0.0 ? alpha * g * std::log(g) : 0.0);
    }
    return total;
}

/// Damped Newton on the simplex interior, started from the uniform point.
Matrix newton_minimizer(const Matrix& c, double alpha, const LinkMask& mask) {
    const auto links = mask.links();
    const std::size_t m = links.size();
    std::vector<double> x(m, 1.0 / static_cast<double>(m));
    auto value = [&](const std::vector<double>& y) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += c(links[k]) * y[k] + alpha * y[k] * std::log(y[k]);
        return s;
    };
    for (int it = 0; it < 200; ++it) {
        std::vector<double> grad(m), inv_h(m);
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            grad[k] = c(links[k]) + alpha * (std::log(x[k]) + 1.0);
            inv_h[k] = x[k] / alpha;
            num += grad[k] * inv_h[k];
            den += inv_h[k];
        }
        const double nu = num / den;
        std::vector<double> dir(m);
        double decrement = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            dir[k] = -inv_h[k] * (grad[k] - nu);
            decrement -= grad[k] * dir[k];
        }
        if (decrement < 1e-24) break;
        double step = 1.0;
        for (std::size_t k = 0; k < m; ++k)
            if (dir[k] < 0.0) step = std::min(step, -0.99 * x[k] / dir[k]);
        const double f0 = value(x);
        std::vector<double> trial(m);
        for (;;) {
            for (std::size_t k = 0; k < m; ++k) trial[k] = x[k] + step * dir[k];
            if (value(trial) <= f0 - 0.25 * step * decrement || step < 1e-12) break;
            step *= 0.5;
        }
        x = trial;
    }
    Matrix out(mask.size());
    for (std::size_t k = 0; k < m; ++k) out(links[k]) = x[k];
    return out;
}

/// i -> target directly; two idle honeypot candidates that differ only in the identification probability.
NetworkSpec twin_candidates() {
    RawNetwork raw = RawNetwork::blank(4);
    raw.dmz = {0};
    raw.reconfigurable = {1, 2};
    raw.target = 3;
    raw.rho[0] = 1.0;
    raw.beta[0][3] = 0.5;
    raw.lambda[0][3] = 1.0;
    raw.q[0][1] = 0.1;
    raw.q[0][2] = 0.5;
    return validate_network(raw);
}

}  // namespace

TEST_CASE("gibbs step examples") {
    SUBCASE("zero coefficients give the uniform policy") {
        const LinkMask mask = first_links(4, 7);
        const PolicyMatrix p = gibbs_step(Matrix(4), 1.0, mask);
        for (const Link& e : mask.links()) CHECK(p(e.source, e.sink) == doctest::Approx(1.0 / 7).epsilon(1e-15));
    }
    SUBCASE("two entries") {
        const LinkMask mask = first_links(3, 2);
        const auto links = mask.links();
        Matrix c(3);
        c(links[1]) = std::log(3.0);
        const PolicyMatrix p = gibbs_step(c, 1.0, mask);
        CHECK(p(links[0].source, links[0].sink) == doctest::Approx(0.75).epsilon(1e-15));
        CHECK(p(links[1].source, links[1].sink) == doctest::Approx(0.25).epsilon(1e-15));
    }
    SUBCASE("zero temperature breaks ties toward the lower index") {
        const LinkMask mask = first_links(3, 3);
        const auto links = mask.links();
        Matrix c(3);
        c(links[0]) = 0.2;
        c(links[1]) = 0.1;
        c(links[2]) = 0.1;
        const PolicyMatrix p = gibbs_step(c, 0.0, mask);
        CHECK(p(links[1].source, links[1].sink) == 1.0);
        Matrix scaled = c;
        for (double& v : scaled.values()) v *= 7.5;
        CHECK(gibbs_step(scaled, 0.0, mask).gamma() == p.gamma());
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(gibbs_step(Matrix(3), 1.0, LinkMask(3)), Error);
        CHECK_THROWS_AS(gibbs_step(Matrix(3), -1.0, first_links(3, 2)), Error);
    }
    SUBCASE("large coefficients do not overflow") {
        const LinkMask mask = first_links(3, 3);
        Matrix c(3);
        const auto links = mask.links();
        c(links[0]) = -5000.0;
        c(links[1]) = -4999.0;
        c(links[2]) = 800.0;
        const PolicyMatrix p = gibbs_step(c, 1.0, mask);
        CHECK(p(links[0].source, links[0].sink) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
        CHECK(p(links[2].source, links[2].sink) == 0.0);
    }
}

TEST_CASE("gibbs step is shift invariant and matches a numerical minimizer") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        RandomStream s({seed, StreamPurpose::Synthetic, 7, 0});
        const std::size_t n = 3 + seed % 4;
        LinkMask mask(n);
        for (NodeIndex l = 0; l < n; ++l)
            for (NodeIndex w = 0; w < n; ++w)
                if (l != w && s.bernoulli(0.7)) mask.set(l, w, true);
        if (mask.count() == 0) mask.set(0, 1, true);
        Matrix c(n);
        for (const Link& e : mask.links()) c(e) = 2.0 * s.uniform();
        const double alpha = 0.2 + 1.8 * s.uniform();
        const PolicyMatrix p = gibbs_step(c, alpha, mask);

        Matrix shifted = c;
        for (const Link& e : mask.links()) shifted(e) += 3.25;
        CHECK(Matrix::max_abs_diff(gibbs_step(shifted, alpha, mask).gamma(), p.gamma()) <= 1e-15);

        const Matrix ref = newton_minimizer(c, alpha, mask);
        CHECK(Matrix::max_abs_diff(ref, p.gamma()) <= 1e-6);
        CHECK(subproblem(c, alpha, p.gamma(), mask) <= subproblem(c, alpha, ref, mask) + 1e-12);
    }
}

TEST_CASE("linearized coefficients") {
    SUBCASE("interference term") {
        const NetworkSpec spec = random_network(3, {.nodes = 5});
        const PolicyMatrix u = PolicyMatrix::uniform(spec);
        const Matrix base = linearized_coefficients(spec, u, {}, 2, BoundVariant::Lower);
        const Matrix with = linearized_coefficients(spec, u, {.alpha_poi = 1.0}, 2, BoundVariant::Lower);
        for (const Link& e : feasible_mask(spec).links())
            CHECK(std::abs(with(e) - base(e) - (1.0 - idle_prob(spec, e.sink))) <= 1e-14);
    }
    SUBCASE("immediate horizon, single initial node") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const NetworkSpec spec = random_network(seed, {.nodes = 3 + seed % 4});
            const PolicyMatrix p = random_policy(spec, seed);
            const NodeIndex j0 = spec.target();
            for (BoundVariant v : {BoundVariant::Lower, BoundVariant::Upper}) {
                const Matrix c = linearized_coefficients(spec, p, {}, 0, v);
                for (const Link& e : feasible_mask(spec).links()) {
                    const double expected =
                        e.source == 0 ? -spec.hit(0, j0) * (1.0 - spec.q(0, e.sink)) * idle_prob(spec, e.sink) : 0.0;
                    CHECK(std::abs(c(e) - expected) <= 1e-14);
                }
            }
        }
    }
    SUBCASE("nothing depends on gamma without links") {
        const NetworkSpec spec = random_network(4, {.nodes = 6, .dmz_size = 2, .link_density = 0.0});
        Matrix d(6, 1.0);
        for (std::size_t i = 0; i < 6; ++i) d(i, i) = 0.0;
        const CostTable costs = CostTable::location(d);
        const Matrix c = linearized_coefficients(spec, random_policy(spec, 2), {.alpha_sl = 0.3}, 3,
                                                 BoundVariant::Upper, {.costs = &costs});
        for (double v : c.values()) CHECK(v == 0.0);
    }
}

TEST_CASE("objective") {
    const NetworkSpec spec = random_network(5, {.nodes = 5, .dmz_size = 2});
    const PolicyMatrix p = random_policy(spec, 5);
    std::map<NodeIndex, double> exact;
    for (const auto& [i, t] : ltv_exact(spec, p, 3)) exact[i] = t.target_compromised[3];
    CHECK(objective(spec, p, {}, 3, LtvVariant::Exact) == doctest::Approx(aggregate_ltv(spec, exact)).epsilon(1e-14));
    CHECK(objective(spec, p, {}, 3, LtvVariant::Lower) ==
          doctest::Approx(aggregate_ltv(spec, ltv_lower(spec, p, 3))).epsilon(1e-14));
    CHECK(objective(spec, p, {}, 3, LtvVariant::Upper) ==
          doctest::Approx(aggregate_ltv(spec, ltv_upper(spec, p, 3))).epsilon(1e-14));

    const NetworkSpec quiet = random_network(5, {.nodes = 5, .link_density = 0.0});
    const PolicyMatrix q = random_policy(quiet, 9);
    CHECK(objective(quiet, q, {.alpha_sl = 1.0}, 2, LtvVariant::Lower) == doctest::Approx(-stealthiness(q)));
    CHECK(objective(quiet, PolicyMatrix::uniform(quiet), {.alpha_sl = 1.0}, 2, LtvVariant::Lower) <
          objective(quiet, q, {.alpha_sl = 1.0}, 2, LtvVariant::Lower));

    CHECK_THROWS_AS(objective(spec, p, {.alpha_poi = -1.0}, 3, LtvVariant::Lower), Error);
    const NetworkSpec big = random_network(5, {.nodes = 13});
    CHECK_THROWS_AS(objective(big, PolicyMatrix::uniform(big), {}, 1, LtvVariant::Exact), Error);
}

TEST_CASE("finite differences agree with the linearization at the immediate horizon") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const NetworkSpec spec = random_network(seed + 40, {.nodes = 4, .dmz_size = 1 + seed % 2});
        const PolicyMatrix p = random_policy(spec, seed);
        const ObjectiveWeights w{.alpha_poi = 0.7};
        for (BoundVariant v : {BoundVariant::Lower, BoundVariant::Upper}) {
            const LtvVariant lv = v == BoundVariant::Lower ? LtvVariant::Lower : LtvVariant::Upper;
            const Matrix c = linearized_coefficients(spec, p, w, 0, v);
            const double f0 = objective(spec, p, w, 0, lv);
            for (const Link& e : feasible_mask(spec).links()) {
                const double h = 1e-6;
                Matrix g = p.gamma();
                g(e) += h;
                for (double& x : g.values()) x /= 1.0 + h;
                double predicted = 0.0;
                for (const Link& f : feasible_mask(spec).links()) predicted += c(f) * (g(f) - p.gamma()(f));
                const double actual = objective(spec, PolicyMatrix::for_network(spec, g), w, 0, lv) - f0;
                CHECK(std::abs(actual - predicted) <= 1e-10);
            }
        }
    }
}

TEST_CASE("optimize") {
    SUBCASE("pure entropy converges to uniform at once") {
        const NetworkSpec quiet = random_network(1, {.nodes = 5, .link_density = 0.0});
        for (PolicyVariant v : {PolicyVariant::Risky, PolicyVariant::Conservative}) {
            const OptimizationResult r = optimize(quiet, {.alpha_sl = 1.0}, 2, v);
            CHECK(r.trace.converged);
            CHECK(r.trace.iterations_used <= 2);
            CHECK(Matrix::max_abs_diff(r.policy.gamma(), PolicyMatrix::uniform(quiet).gamma()) <= 1e-15);
        }
    }
    SUBCASE("lower identification probability attracts more mass") {
        const NetworkSpec spec = twin_candidates();
        for (PolicyVariant v : {PolicyVariant::Risky, PolicyVariant::Conservative}) {
            const OptimizationResult r = optimize(spec, {.alpha_sl = 0.01}, 1, v);
            CHECK(r.trace.converged);
            CHECK(r.policy(0, 1) > r.policy(0, 2));
            CHECK(r.policy(0, 1) > 0.99);
        }
    }
    SUBCASE("trace invariants and subproblem improvement") {
        const NetworkSpec spec = random_network(77, {.nodes = 5, .dmz_size = 2});
        const ObjectiveWeights w{.alpha_poi = 0.1, .alpha_sl = 0.05};
        const OptimizationResult r = optimize(spec, w, 3, PolicyVariant::Risky);
        const OptimizationTrace& t = r.trace;
        CHECK(t.step_norms.size() + 1 == t.iterates.size());
        CHECK(t.objective_values.size() == t.iterates.size());
        CHECK(t.iterations_used == t.step_norms.size());
        const LinkMask mask = feasible_mask(spec);
        for (std::size_t k = 0; k < t.iterates.size(); ++k) {
            CHECK(std::abs(t.iterates[k].gamma().sum() - 1.0) <= 1e-12);
            for (NodeIndex l = 0; l < 5; ++l)
                for (NodeIndex x = 0; x < 5; ++x)
                    if (!mask(l, x)) CHECK(t.iterates[k](l, x) == 0.0);
            if (k + 1 < t.iterates.size()) {
                CHECK(std::isfinite(t.step_norms[k]));
                const Matrix c = linearized_coefficients(spec, t.iterates[k], w, 3, BoundVariant::Lower);
                CHECK(subproblem(c, w.alpha_sl, t.iterates[k + 1].gamma(), mask) <=
                      subproblem(c, w.alpha_sl, t.iterates[k].gamma(), mask) + 1e-12);
            }
        }
        REQUIRE(t.converged);
        CHECK(t.step_norms.back() <= 1e-6);
        CHECK(t.objective_values.back() == doctest::Approx(objective(spec, r.policy, w, 3, LtvVariant::Lower)));
        CHECK_NOTHROW(require_converged(r));
    }
    SUBCASE("non-convergence is reported") {
        const NetworkSpec spec = random_network(78, {.nodes = 5, .dmz_size = 2});
        const OptimizationResult r = optimize(spec, {.alpha_sl = 0.05}, 3, PolicyVariant::Conservative, {.max_iter = 1, .initial = std::nullopt, .context = {}});
        CHECK_FALSE(r.trace.converged);
        CHECK(r.trace.iterations_used == 1);
        try {
            require_converged(r);
            FAIL("expected DidNotConverge");
        } catch (const DidNotConverge& e) {
            CHECK(e.result().trace.iterates.size() == 2);
            CHECK(e.result().policy.gamma() == r.policy.gamma());
        }
    }
    SUBCASE("argument errors") {
        const NetworkSpec spec = fig1_network();
        CHECK_THROWS_AS(optimize(spec, {}, 1, PolicyVariant::Risky, {.epsilon = 0.0, .max_iter = 200, .initial = std::nullopt, .context = {}}), Error);
        CHECK_THROWS_AS(optimize(spec, {}, 1, PolicyVariant::Risky, {.max_iter = 0, .initial = std::nullopt, .context = {}}), Error);
    }
}
