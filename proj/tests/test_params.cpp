#include "mtfee/errors.hpp"
#include "mtfee/params.hpp"
#include "mtfee/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace mtfee;

namespace {

ValidatedParams base() { return validate(ModelParams{}.with_default_delta_inf()); }

bool mentions(const ValidationError& e, const std::string& what) {
    for (const auto& v : e.violations())
        if (v.find(what) != std::string::npos) return true;
    return false;
}

// Brute-force maximiser of one side of h over a grid of step 1e-4, refined by
// the vertex of the parabola through the best grid point and its neighbours.
std::pair<double, double> grid_argmax(double z, double lo, double hi, const ValidatedParams& vp) {
    const double step = 1e-4;
    const auto n = static_cast<long>((hi - lo) / step);
    long best = 0;
    double best_v = -INFINITY;
    for (long i = 0; i <= n; ++i) {
        const double v = side_objective(lo + i * step, z, vp);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    const double d0 = lo + best * step;
    if (best == 0 || best == n) return {d0, best_v};
    const double fm = side_objective(d0 - step, z, vp), fp = side_objective(d0 + step, z, vp);
    const double denom = fm - 2.0 * best_v + fp;
    const double d = d0 + 0.5 * step * (fm - fp) / denom;
    return {d, side_objective(d, z, vp)};
}

}  // namespace

TEST_CASE("reference set with the default bound validates") {
    const ValidatedParams vp = base();
    CHECK(vp.model().delta_inf == doctest::Approx(vp.constants().delta_cap + 1.0));
    CHECK(vp.constants().delta_cap == doctest::Approx(1328.7).epsilon(1e-4));
}

TEST_CASE("delta_inf below the admissibility bound is an error") {
    ModelParams p;
    p.delta_inf = 0.0;
    try {
        validate(p);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "delta_inf below Δ∞"));
    }
}

TEST_CASE("each failed invariant is reported individually") {
    ModelParams p;
    p.gamma = 0.0;
    p.sigma = -1.0;
    p.q_bar = 0;
    p.c = -0.1;
    p.delta_inf = 1e9;
    try {
        validate(p);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "gamma must be positive"));
        CHECK(mentions(e, "sigma must be positive"));
        CHECK(mentions(e, "q_bar must be at least 1"));
        CHECK(mentions(e, "c must be non-negative"));
        CHECK(e.violations().size() == 4);
    }
}

TEST_CASE("gamma = 0 reported without a spurious delta_inf violation") {
    ModelParams p;
    p.gamma = 0.0;
    p = p.with_default_delta_inf();
    try {
        validate(p);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(mentions(e, "gamma must be positive"));
        CHECK(e.violations().size() == 1);
    }
}

TEST_CASE("intensity") {
    const ValidatedParams vp = base();
    CHECK(intensity(-0.5, vp) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(intensity(0.5, vp) == doctest::Approx(1.5 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(intensity(0.5, vp) == doctest::Approx(0.55182).epsilon(1e-5));
    CHECK_THROWS_AS(intensity(vp.model().delta_inf * 1.01, vp), ValidationError);

    Rng rng(7, 0);
    for (int i = 0; i < 200; ++i) {
        const double a = 20.0 * (rng.uniform() - 0.5), b = 20.0 * (rng.uniform() - 0.5);
        const double la = intensity(a, vp), lb = intensity(b, vp);
        if (a < b) CHECK(la > lb);
        CHECK(std::log(la) - std::log(lb) == doctest::Approx(-vp.model().k * (a - b) / vp.model().sigma).epsilon(1e-9));
    }
}

TEST_CASE("spread map") {
    const ValidatedParams vp = base();
    const double off = std::log(1.0 + 0.3 * 0.01 / 0.3) / 0.01;
    CHECK(spread_map(off, vp) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(spread_map(0.0, vp) == doctest::Approx(100.0 * std::log(1.01)).epsilon(1e-14));
    CHECK(spread_map(0.0, vp) == doctest::Approx(0.99503).epsilon(1e-5));
    const double cap = vp.model().delta_inf;
    CHECK(spread_map(cap + off + 1.0, vp) == -cap);
    CHECK(spread_map(-(cap + 5.0), vp) == cap);
    double prev = INFINITY;
    for (double z = -2.0 * cap; z <= 2.0 * cap; z += cap / 50.0) {
        const double d = spread_map(z, vp);
        CHECK(d <= prev);
        prev = d;
    }
}

TEST_CASE("derived constants against independent evaluation") {
    const ValidatedParams vp = base();
    const auto& d = vp.constants();
    const double s = 0.3, A = 1.5, k = 0.3, g = 0.01, e = 1.0, c = 0.5;
    // Same constants written with σ, k, γ, η directly rather than α, β.
    const double kf = 1.0 - s * s * g * e / ((k + s * g) * (k + s * e));
    const double c0 = A * (s * e / k) * std::pow(1.0 + s * g / k, -k / (s * g)) * std::pow(kf, 1.0 + k / (s * e));
    CHECK(d.c0 == doctest::Approx(c0).epsilon(1e-13));
    CHECK(d.c0 == doctest::Approx(0.5491).epsilon(1e-4));
    CHECK(d.c1 == doctest::Approx(4.4554e-4).epsilon(1e-4));
    CHECK(d.c1_prime == doctest::Approx(d.c0).epsilon(1e-14));
    CHECK(d.zeta0 == doctest::Approx(c + std::log(kf) / e).epsilon(1e-14));
    CHECK(d.zeta0 == doctest::Approx(0.4950).epsilon(1e-4));
    CHECK(d.c1_tilde == doctest::Approx(s * g * k / 2.0).epsilon(1e-15));
    CHECK(d.gamma_fb == doctest::Approx(g * e / (g + e)).epsilon(1e-15));
    CHECK(d.gamma_fb == doctest::Approx(9.90099e-3).epsilon(1e-6));
    CHECK(d.gamma_fb < std::min(g, e));
    for (double x : {d.c0, d.c1, d.c1_prime, d.c1_tilde, d.c1_tilde_prime, d.c_n, d.c_n_prime, d.c_n_hat, d.gamma_fb,
                     d.c1_fb, d.c1_tilde_fb, d.c_inf, d.delta_cap})
        CHECK(x > 0.0);
    const double cinf = c + (1.0 / e + 1.0 / g) * std::log(1.0 + s * g / k) - std::log(kf) / e;
    CHECK(d.c_inf == doctest::Approx(cinf).epsilon(1e-14));
    CHECK(d.delta_cap == doctest::Approx(cinf + (s / k) * (2.0 * d.c1_prime + d.c1 * 2500.0) * 600.0).epsilon(1e-14));
}

TEST_CASE("single-exchange reductions of the Nash constants") {
    Rng rng(11, 0);
    for (int i = 0; i < 50; ++i) {
        ModelParams p;
        p.sigma = 0.1 + rng.uniform();
        p.k = 0.1 + rng.uniform();
        p.gamma = 0.001 + 0.1 * rng.uniform();
        p.eta = 0.1 + 2.0 * rng.uniform();
        p.A = 0.5 + 2.0 * rng.uniform();
        p.T = 10.0;
        p.q_bar = 5;
        const auto d = validate(p.with_default_delta_inf()).constants();
        CHECK(std::abs(d.c_n / d.c1 - 1.0) <= 1e-14);
        CHECK(std::abs(d.c_n_prime / d.c1_prime - 1.0) <= 1e-14);
        CHECK(std::abs(d.c_n_hat / d.c0 - 1.0) <= 1e-14);
    }
}

TEST_CASE("benchmark constant forms") {
    ModelParams p;
    p.benchmark_constants = ConstantsForm::literal;
    const auto lit = compute_constants(p);
    const double a = 0.3 * 0.01 / 0.3;
    CHECK(lit.c1_tilde_prime == doctest::Approx(1.5 * std::pow(1.0 + a, -(1.0 + a))).epsilon(1e-14));
    p.benchmark_constants = ConstantsForm::derived;
    const auto der = compute_constants(p);
    CHECK(der.c1_tilde_prime ==
          doctest::Approx(1.5 * std::exp(-0.3 * 0.5 / 0.3) * std::pow(1.0 + a, -(1.0 + 1.0 / a))).epsilon(1e-13));
}

TEST_CASE("hamiltonian barrier convention") {
    const ValidatedParams vp = base();
    const int qb = vp.model().q_bar;
    const IncentiveTriple z{0.0, 0.3, 0.7};
    const double ask = side_objective(spread_map(0.3, vp), 0.3, vp);
    const double bid = side_objective(spread_map(0.7, vp), 0.7, vp);
    CHECK(hamiltonian(z, qb, vp) == doctest::Approx(ask).epsilon(1e-15));
    CHECK(hamiltonian(z, -qb, vp) == doctest::Approx(bid).epsilon(1e-15));
    CHECK(hamiltonian(z, 0, vp) == doctest::Approx(ask + bid).epsilon(1e-15));
    CHECK_THROWS_AS(hamiltonian(z, qb + 1, vp), ValidationError);
}

TEST_CASE("hamiltonian unclamped per-side value") {
    const ValidatedParams vp = base();
    const auto& p = vp.model();
    Rng rng(3, 0);
    for (int i = 0; i < 100; ++i) {
        const double za = 10.0 * (rng.uniform() - 0.5), zb = 10.0 * (rng.uniform() - 0.5);
        const double expect = (intensity(spread_map(za, vp), vp) + intensity(spread_map(zb, vp), vp)) * p.sigma /
                              (p.k + p.sigma * p.gamma);
        CHECK(hamiltonian({0.0, za, zb}, 0, vp) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("hamiltonian matches brute-force maximisation per side") {
    const ValidatedParams vp = base();
    Rng rng(5, 0);
    for (int i = 0; i < 20; ++i) {
        const double z = 6.0 * (rng.uniform() - 0.5);
        const double d = spread_map(z, vp);
        const auto [arg, val] = grid_argmax(z, d - 3.0, d + 3.0, vp);
        CHECK(std::abs(arg - d) <= 1e-6);
        CHECK(std::abs(val / side_objective(d, z, vp) - 1.0) <= 1e-8);
        // H dominates h at random admissible spreads.
        for (int j = 0; j < 20; ++j) {
            const double delta = d + 20.0 * (rng.uniform() - 0.5);
            CHECK(side_objective(delta, z, vp) <= side_objective(d, z, vp) * (1.0 + 1e-15));
        }
    }
}
