#include "mtfee/cli.hpp"
#include "mtfee/rng.hpp"
#include "mtfee/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mtfee {

namespace {

std::string num(double x) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << x;
    return os.str();
}

ValidatedParams desk(ModelParams p, int q_bar, double T) {
    p.q_bar = q_bar;
    p.T = T;
    p.delta_inf = std::numeric_limits<double>::quiet_NaN();
    return validate(p.with_default_delta_inf());
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const ModelParams& base, std::uint64_t seed) {
    std::vector<CheckResult> out;
    const ValidatedParams vp = desk(base, 10, base.T);
    const RegimeSpec ex = regime_spec(vp, Regime::exchange);
    const auto times = uniform_grid(ex.T, 100);
    const ValueGrid grid = solve_matrix_exp(ex, times);

    double err_series = 0.0, err_unif = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (int q = -ex.q_bar; q <= ex.q_bar; ++q) {
            const double m = grid.log_u(i, q);
            err_series = std::max(err_series, std::abs(std::expm1(solve_series(ex, times[i], q) - m)));
            err_unif = std::max(err_unif, std::abs(std::expm1(solve_uniformized(ex, times[i], q) - m)));
        }
    }
    out.push_back({"matrix_exp_vs_series", err_series <= 1e-10, "max relative difference " + num(err_series)});
    out.push_back({"matrix_exp_vs_uniformized", err_unif <= 1e-10, "max relative difference " + num(err_unif)});

    double sym = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        for (int q = 1; q <= ex.q_bar; ++q) sym = std::max(sym, std::abs(grid.log_u(i, q) - grid.log_u(i, -q)));
    out.push_back({"inventory_symmetry", sym <= 1e-10 * (1.0 + ex.log_upper(ex.T)), "max |log u(q) - log u(-q)| " + num(sym)});

    bool bounds_ok = true;
    std::string bounds_detail;
    for (Regime r : {Regime::exchange, Regime::benchmark, Regime::nash, Regime::first_best}) {
        const RegimeSpec s = regime_spec(vp, r);
        const ValueGrid g = solve_matrix_exp(s, times);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double tau = s.T - times[i];
            const double slack = 1e-12 * (1.0 + s.log_upper(tau) - s.log_lower(tau));
            for (int q = -s.q_bar; q <= s.q_bar; ++q) {
                const double l = g.log_u(i, q);
                const bool ok = (tau == 0.0) ? l == 0.0 : (l >= s.log_lower(tau) - slack && l <= s.log_upper(tau) + slack);
                if (!ok && bounds_ok) bounds_detail = to_string(r) + " violates at t=" + std::to_string(times[i]) + " q=" + std::to_string(q);
                bounds_ok = bounds_ok && ok;
            }
        }
    }
    out.push_back({"boundary_and_bounds", bounds_ok, bounds_ok ? "all regimes, all nodes" : bounds_detail});

    const LogRatioGrid lr = solve_log_ratios(ex, 0.01);
    double lr_exp = 0.0, lr_series = 0.0, anti = 0.0;
    for (std::size_t i = 0; i < lr.times.size(); ++i) {
        const auto row = grid.factor()->log_apply_ones(ex.T - lr.times[i]);
        for (int q = -ex.q_bar; q < ex.q_bar; ++q) {
            const std::size_t k = static_cast<std::size_t>(q + ex.q_bar);
            lr_exp = std::max(lr_exp, std::abs(lr.at(i, q) - (row[k + 1] - row[k])));
            anti = std::max(anti, std::abs(lr.at(i, q) + lr.at(i, -q - 1)));
        }
    }
    for (int q = -ex.q_bar; q < ex.q_bar; ++q)
        lr_series = std::max(lr_series, std::abs(lr.at(0, q) - (solve_series(ex, 0.0, q + 1) - solve_series(ex, 0.0, q))));
    out.push_back({"log_ratio_vs_matrix_exp", lr_exp <= 1e-3, "max |v+ - matrix-exp ratio| " + num(lr_exp)});
    out.push_back({"log_ratio_vs_series", lr_series <= 1e-3, "max |v+(0,.) - series ratio| " + num(lr_series)});
    out.push_back({"log_ratio_antisymmetry", anti <= 1e-10, "max |v+(q) + v+(-q-1)| " + num(anti)});

    const RegimeSpec n1 = regime_spec(vp, Regime::nash);  // vp has N = 1 unless configured otherwise
    if (n1.n == 1) {
        const ValueGrid gn = solve_matrix_exp(n1, times);
        double d = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i)
            for (int q = -ex.q_bar; q <= ex.q_bar; ++q) d = std::max(d, std::abs(gn.log_u(i, q) - grid.log_u(i, q)));
        out.push_back({"nash_single_exchange", d <= 1e-12, "max |log u_nash - log u| " + num(d)});
    }

    const ValidatedParams small = desk(base, 5, 10.0);
    const RegimeSpec sm = regime_spec(small, Regime::exchange);
    const auto sm_factor = factor_generator(sm);
    Rng pick(seed, 0xC0FFEEULL);
    double worst = 0.0;
    bool envelope = true;
    for (int n = 0; n < 20; ++n) {
        const double t = sm.T * pick.uniform();
        const int q = static_cast<int>(pick.next() % (2 * sm.q_bar + 1)) - sm.q_bar;
        const McEstimate e = solve_mc(sm, t, q, 100000, seed + static_cast<std::uint64_t>(n));
        const double exact = std::exp(sm_factor->log_apply_ones(sm.T - t, q + sm.q_bar));
        worst = std::max(worst, std::abs(e.mean - exact) / e.std_error);
        envelope = envelope && e.within_envelope;
    }
    out.push_back({"mc_representation", worst <= 3.0 && envelope, "max |z| over 20 nodes " + num(worst)});
    return out;
}

}  // namespace mtfee
