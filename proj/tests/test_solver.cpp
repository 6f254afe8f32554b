#include "mtfee/errors.hpp"
#include "mtfee/rng.hpp"
#include "mtfee/solver.hpp"

#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <vector>

using namespace mtfee;

namespace {

ValidatedParams desk(int q_bar, double T) {
    ModelParams p;
    p.q_bar = q_bar;
    p.T = T;
    return validate(p.with_default_delta_inf());
}

using Mat = std::vector<std::vector<long double>>;

Mat matmul(const Mat& a, const Mat& b) {
    const std::size_t n = a.size();
    Mat c(n, std::vector<long double>(n, 0.0L));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

// Dense scaling-and-squaring Taylor exponential in long double, applied to 1.
// Shares nothing with the eigendecomposition route.
std::vector<long double> dense_exp_ones(const RegimeSpec& s, double tau) {
    const int n = 2 * s.q_bar + 1;
    Mat b(n, std::vector<long double>(n, 0.0L));
    long double norm = 0;
    for (int i = 0; i < n; ++i) {
        const long double q = i - s.q_bar;
        b[i][i] = -s.c * q * q * tau;
        if (i > 0) b[i][i - 1] = s.c_prime * tau;
        if (i + 1 < n) b[i][i + 1] = s.c_prime * tau;
        norm = std::max(norm, std::abs(b[i][i]) + 2.0L * s.c_prime * tau);
    }
    int sq = 0;
    while (norm > 0.25L) {
        norm /= 2;
        ++sq;
    }
    const long double scale = std::ldexp(1.0L, -sq);
    for (auto& row : b)
        for (auto& x : row) x *= scale;
    Mat e(n, std::vector<long double>(n, 0.0L)), term(e);
    for (int i = 0; i < n; ++i) e[i][i] = term[i][i] = 1.0L;
    for (int k = 1; k <= 30; ++k) {
        term = matmul(term, b);
        for (auto& row : term)
            for (auto& x : row) x /= k;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) e[i][j] += term[i][j];
    }
    for (int i = 0; i < sq; ++i) e = matmul(e, e);
    std::vector<long double> out(n, 0.0L);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i] += e[i][j];
    return out;
}

}  // namespace

TEST_CASE("matrix exponential agrees with a dense long-double oracle") {
    const ValidatedParams vp = desk(5, 10.0);
    for (Regime r : {Regime::exchange, Regime::benchmark, Regime::nash, Regime::first_best}) {
        const RegimeSpec s = regime_spec(vp, r);
        const auto times = uniform_grid(s.T, 11);
        const ValueGrid g = solve_matrix_exp(s, times);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const auto ref = dense_exp_ones(s, s.T - times[i]);
            for (int q = -s.q_bar; q <= s.q_bar; ++q)
                CHECK(std::abs(g.log_u(i, q) - static_cast<double>(std::log(ref[q + s.q_bar]))) <= 1e-12);
        }
    }
}

TEST_CASE("boundary, envelope and inventory symmetry") {
    for (int qb : {3, 10, 50}) {
        const ValidatedParams vp = desk(qb, 600.0);
        for (Regime r : {Regime::exchange, Regime::benchmark, Regime::nash, Regime::first_best}) {
            const RegimeSpec s = regime_spec(vp, r);
            const auto times = uniform_grid(s.T, 61);
            const ValueGrid g = solve_matrix_exp(s, times);
            for (std::size_t i = 0; i < times.size(); ++i) {
                const double tau = s.T - times[i];
                for (int q = -qb; q <= qb; ++q) {
                    const double l = g.log_u(i, q);
                    if (tau == 0.0) {
                        CHECK(l == 0.0);
                        continue;
                    }
                    CHECK(l >= s.log_lower(tau) * (1.0 + 1e-12));
                    CHECK(l <= s.log_upper(tau) * (1.0 + 1e-12));
                    CHECK(std::abs(l - g.log_u(i, -q)) <= 1e-11 * (1.0 + std::abs(l)));
                }
            }
        }
    }
}

TEST_CASE("large inventory cap stays finite in log storage") {
    const ValidatedParams vp = desk(50, 600.0);
    const RegimeSpec s = regime_spec(vp, Regime::exchange);
    const ValueGrid g = solve_matrix_exp(s, {0.0, 600.0});
    CHECK(g.log_u(0, 0) == doctest::Approx(649.89).epsilon(1e-5));
    CHECK(g.log_u(0, 50) == doctest::Approx(615.37).epsilon(1e-5));
    CHECK(g.log_u(0, 50) >= -668.4);
    CHECK(g.log_u(0, 50) <= 2.0 * s.c_prime * 600.0);
}

TEST_CASE("evaluation between grid nodes is exact") {
    const ValidatedParams vp = desk(10, 600.0);
    const RegimeSpec s = regime_spec(vp, Regime::exchange);
    const ValueGrid coarse = solve_matrix_exp(s, uniform_grid(600.0, 3));
    for (double t : {17.3, 299.99, 451.0}) {
        const ValueGrid fine = solve_matrix_exp(s, {t});
        for (int q = -10; q <= 10; ++q) CHECK(coarse.log_u_at(t, q) == fine.log_u(0, q));
    }
    CHECK_THROWS_AS(solve_matrix_exp(s, {10.0, 5.0}), ValidationError);
}

TEST_CASE("series boundary, argument checks and the commuting case") {
    const ValidatedParams vp = desk(10, 600.0);
    const RegimeSpec s = regime_spec(vp, Regime::exchange);
    CHECK(solve_series(s, s.T, 3) == 0.0);
    CHECK_THROWS_AS(solve_series(s, 0.0, 0, 0.0), ValidationError);
    CHECK_THROWS_AS(solve_series(s, 0.0, 11), ValidationError);

    // With C = 0 and an unreachable barrier the two operators in the series
    // commute and it must reproduce e^{2C'τ} exactly.
    RegimeSpec free = s;
    free.c = 0.0;
    free.q_bar = 80;
    for (double t : {590.0, 595.0, 599.0}) {
        const double tau = free.T - t;
        CHECK(solve_series(free, t, 0) == doctest::Approx(2.0 * free.c_prime * tau).epsilon(1e-12));
    }
}

TEST_CASE("uniformized series matches the matrix exponential") {
    const ValidatedParams vp = desk(10, 600.0);
    for (Regime r : {Regime::exchange, Regime::benchmark}) {
        const RegimeSpec s = regime_spec(vp, r);
        const auto times = uniform_grid(s.T, 13);
        const ValueGrid g = solve_matrix_exp(s, times);
        for (std::size_t i = 0; i < times.size(); ++i)
            for (int q = -10; q <= 10; q += 3)
                CHECK(std::abs(std::expm1(solve_uniformized(s, times[i], q) - g.log_u(i, q))) <= 1e-10);
    }
}

TEST_CASE("MC representation") {
    const ValidatedParams vp = desk(5, 10.0);
    const RegimeSpec s = regime_spec(vp, Regime::exchange);

    SUBCASE("deterministic weight without penalty or barrier") {
        RegimeSpec free = s;
        free.c = 0.0;
        free.q_bar = 1000;
        const McEstimate e = solve_mc(free, 2.0, 0, 1000, 9);
        CHECK(e.mean == doctest::Approx(std::exp(2.0 * free.c_prime * 8.0)).epsilon(1e-12));
    }
    SUBCASE("agrees with the matrix exponential within 3 s.e.") {
        const auto f = factor_generator(s);
        for (auto [t, q] : {std::pair{0.0, 0}, std::pair{3.0, 5}, std::pair{7.5, -2}}) {
            const McEstimate e = solve_mc(s, t, q, 100000, 42);
            const double exact = std::exp(f->log_apply_ones(s.T - t, q + s.q_bar));
            CHECK(std::abs(e.mean - exact) <= 3.0 * e.std_error);
            CHECK(e.within_envelope);
            CHECK(e.mean >= std::exp(s.log_lower(s.T - t)));
            CHECK(e.mean <= std::exp(s.log_upper(s.T - t)));
        }
    }
    SUBCASE("bit-identical across thread counts and against the serial reference") {
        const McEstimate ref = solve_mc_serial(s, 1.0, 1, 5000, 77);
        for (int threads : {1, 8}) {
            omp_set_num_threads(threads);
            const McEstimate e = solve_mc(s, 1.0, 1, 5000, 77);
            CHECK(e.mean == ref.mean);
            CHECK(e.std_error == ref.std_error);
        }
    }
    CHECK_THROWS_AS(solve_mc(s, 0.0, 0, 99, 1), ValidationError);
}

TEST_CASE("log-ratio scheme") {
    const ValidatedParams vp = desk(10, 600.0);
    const RegimeSpec s = regime_spec(vp, Regime::exchange);
    const auto f = factor_generator(s);
    const LogRatioGrid lr = solve_log_ratios(s, 0.01);

    CHECK(lr.times.front() == 0.0);
    CHECK(lr.times.back() == s.T);
    CHECK(lr.times.size() <= 1001);
    for (int q = -10; q < 10; ++q) CHECK(lr.at(lr.times.size() - 1, q) == 0.0);

    double err = 0.0, anti = 0.0;
    for (std::size_t i = 0; i < lr.times.size(); ++i) {
        const auto row = f->log_apply_ones(s.T - lr.times[i]);
        for (int q = -10; q < 10; ++q) {
            err = std::max(err, std::abs(lr.at(i, q) - (row[q + 11] - row[q + 10])));
            anti = std::max(anti, std::abs(lr.at(i, q) + lr.at(i, -q - 1)));
        }
    }
    CHECK(err <= 1e-3);
    CHECK(anti <= 1e-10);

    SUBCASE("fourth order in dt") {
        // Max error over stored nodes; near maturity the profile is steep, at t=0 it is stationary.
        std::vector<double> errs;
        for (double dt : {0.08, 0.04, 0.02, 0.01}) {
            const LogRatioGrid g = solve_log_ratios(s, dt);
            double e = 0.0;
            for (std::size_t i = 0; i < g.times.size(); ++i) {
                const auto row = f->log_apply_ones(s.T - g.times[i]);
                for (int q = -10; q < 10; ++q) e = std::max(e, std::abs(g.at(i, q) - (row[q + 11] - row[q + 10])));
            }
            errs.push_back(e);
        }
        for (std::size_t i = 1; i < errs.size(); ++i) {
            const double order = std::log2(errs[i - 1] / errs[i]);
            CHECK(order == doctest::Approx(4.0).epsilon(0.1));
        }
    }
    CHECK_THROWS_AS(solve_log_ratios(s, 0.0), ValidationError);
    CHECK_THROWS_AS(solve_log_ratios(s, 700.0), ValidationError);
    CHECK_THROWS_AS(solve_log_ratios(s, 300.0), NumericalError);
}

TEST_CASE("value transformation") {
    const ValidatedParams vp = desk(10, 600.0);
    const RegimeSpec s = regime_spec(vp, Regime::exchange);
    const auto times = uniform_grid(s.T, 11);
    const ValueGrid g = solve_matrix_exp(s, times);
    for (int q = -10; q <= 10; ++q) CHECK(value_v(g, times.size() - 1, q) == -1.0);
    const double v = value_v(g, 0, 0);
    CHECK(v < 0.0);
    CHECK(std::isfinite(v));
    CHECK(log_neg_v(g, 0, 0) > -s.theta * s.log_upper(s.T));
    CHECK(log_neg_v(g, 0, 0) < -s.theta * s.log_lower(s.T));
    // larger log u ⇒ larger v
    CHECK(g.log_u(0, 0) > g.log_u(0, 10));
    CHECK(value_v(g, 0, 0) > value_v(g, 0, 10));
    const ValueGrid b = solve_matrix_exp(regime_spec(vp, Regime::benchmark), times);
    CHECK_THROWS_AS(value_v(b, 0, 0), ValidationError);
}

TEST_CASE("Nash grid with one exchange equals the exchange grid") {
    const ValidatedParams vp = desk(10, 600.0);
    const auto times = uniform_grid(600.0, 101);
    const ValueGrid a = solve_matrix_exp(regime_spec(vp, Regime::exchange), times);
    const ValueGrid b = solve_matrix_exp(regime_spec(vp, Regime::nash), times);
    for (std::size_t i = 0; i < times.size(); ++i)
        for (int q = -10; q <= 10; ++q) CHECK(std::abs(a.log_u(i, q) - b.log_u(i, q)) <= 1e-12);
}
