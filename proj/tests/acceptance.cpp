// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include "mtfee/contract.hpp"
#include "mtfee/experiment.hpp"
#include "mtfee/rng.hpp"
#include "mtfee/solver.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace mtfee;

namespace {

constexpr std::uint64_t kSeed = 20180417;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [fail]");
    }
};

std::string num(double x, int prec = 4) {
    std::ostringstream os;
    os << std::setprecision(prec) << x;
    return os.str();
}

ValidatedParams desk(int q_bar, double T = 600.0, int n = 1) {
    ModelParams p;
    p.q_bar = q_bar;
    p.T = T;
    p.n_exchanges = n;
    return validate(p.with_default_delta_inf());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<Regime> kRegimes = {Regime::exchange, Regime::benchmark, Regime::nash, Regime::first_best};

void cross_validation(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const RegimeSpec s = regime_spec(desk(10), Regime::exchange);
    const auto times = uniform_grid(s.T, 100);
    const ValueGrid g = solve_matrix_exp(s, times);
    double err = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        for (int q = -10; q <= 10; ++q)
            err = std::max(err, std::abs(std::expm1(solve_series(s, times[i], q) - g.log_u(i, q))));
    o.require(err <= 1e-10, "series vs matrix exp max rel diff " + num(err));

    const RegimeSpec sm = regime_spec(desk(5, 10.0), Regime::exchange);
    const auto f = factor_generator(sm);
    Rng pick(kSeed, 0xACCE55ULL);
    double worst = 0.0;
    for (int n = 0; n < 20; ++n) {
        const double t = sm.T * pick.uniform();
        const int q = static_cast<int>(pick.next() % 11) - 5;
        const McEstimate e = solve_mc(sm, t, q, 100000, kSeed + n);
        worst = std::max(worst, std::abs(e.mean - std::exp(f->log_apply_ones(sm.T - t, q + 5))) / e.std_error);
    }
    o.require(worst <= 3.0, "MC max |z| over 20 nodes " + num(worst));
    const double secs = seconds_since(t0);
    o.require(secs < 60.0, "runtime " + num(secs, 3) + " s");
}

void boundary_and_bounds(Outcome& o) {
    for (int qb : {10, 50}) {
        const ValidatedParams vp = desk(qb);
        for (Regime r : kRegimes) {
            const RegimeSpec s = regime_spec(vp, r);
            const auto times = uniform_grid(s.T, 100);
            const ValueGrid g = solve_matrix_exp(s, times);
            bool terminal = true, bounds = true;
            for (std::size_t i = 0; i < times.size(); ++i) {
                const double tau = s.T - times[i];
                const double slack = 1e-12 * (1.0 + s.log_upper(tau) - s.log_lower(tau));
                for (int q = -qb; q <= qb; ++q) {
                    const double l = g.log_u(i, q);
                    if (tau == 0.0) terminal = terminal && l == 0.0;
                    else bounds = bounds && l >= s.log_lower(tau) - slack && l <= s.log_upper(tau) + slack;
                }
            }
            o.require(terminal && bounds, to_string(r) + " q_bar=" + std::to_string(qb));
        }
    }
}

void log_ratio_scheme(Outcome& o) {
    const RegimeSpec s = regime_spec(desk(10), Regime::exchange);
    const auto f = factor_generator(s);
    const LogRatioGrid lr = solve_log_ratios(s, 0.01);
    double vs_series = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, lr.times.size() / 20);
    for (std::size_t i = 0; i < lr.times.size(); i += stride) {
        double prev = solve_series(s, lr.times[i], -10);
        for (int q = -10; q < 10; ++q) {
            const double next = solve_series(s, lr.times[i], q + 1);
            vs_series = std::max(vs_series, std::abs(lr.at(i, q) - (next - prev)));
            prev = next;
        }
    }
    o.require(vs_series <= 1e-3, "v+ vs series max abs diff " + num(vs_series));

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
    std::string orders;
    bool fourth = true;
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double p = std::log2(errs[i - 1] / errs[i]);
        fourth = fourth && std::abs(p - 4.0) <= 0.3;
        orders += (i > 1 ? "," : "") + num(p, 3);
    }
    o.require(fourth, "observed orders vs matrix exp " + orders);
}

void nash_reduction(Outcome& o) {
    const ValidatedParams vp = desk(10);
    const auto& d = vp.constants();
    const double rc = std::max({std::abs(d.c_n / d.c1 - 1.0), std::abs(d.c_n_prime / d.c1_prime - 1.0),
                                std::abs(d.c_n_hat / d.c0 - 1.0)});
    o.require(rc <= 1e-12, "constants max rel diff " + num(rc));

    const auto times = uniform_grid(vp.model().T, 101);
    auto ge = std::make_shared<const ValueGrid>(solve_matrix_exp(regime_spec(vp, Regime::exchange), times));
    auto gn = std::make_shared<const ValueGrid>(solve_matrix_exp(regime_spec(vp, Regime::nash), times));
    const ContractPolicy e = contracted_policy(ge, vp), n = nash_policy(gn, vp);
    double diff = 0.0;
    bool shape = true;
    auto cmp = [&](const std::optional<double>& a, const std::optional<double>& b) {
        shape = shape && a.has_value() == b.has_value();
        if (a && b) diff = std::max(diff, std::abs(*a - *b));
    };
    for (double t : times)
        for (int q = -10; q <= 10; ++q) {
            const Quote a = e.at(t, q), b = n.at(t, q);
            diff = std::max(diff, std::abs(a.zs - b.zs));
            cmp(a.za, b.za);
            cmp(a.zb, b.zb);
            cmp(a.ask, b.ask);
            cmp(a.bid, b.bid);
        }
    o.require(shape && diff <= 1e-12, "policy max abs diff " + num(diff));
}

// φ written from the raw parameters, sharing no code with the library.
double phi(double z, double v_next, double v_self, const ModelParams& p, double cap) {
    const double d0 = -z + std::log1p(p.sigma * p.gamma / p.k) / p.gamma;
    const double delta = std::clamp(d0, -cap, cap);
    const double mm = p.eta / p.gamma * (1.0 - std::exp(-p.gamma * (z + delta))) + 1.0;
    return p.A * std::exp(-p.k * (delta + p.c) / p.sigma) * (v_next * std::exp(p.eta * (z - p.c)) - v_self * mm);
}

void hamiltonian_closed_forms(Outcome& o) {
    const ValidatedParams vp = desk(50);
    const ModelParams& p = vp.model();
    Rng rng(kSeed, 5);
    double arg_err = 0.0, val_err = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double v_self = -std::exp(4.0 * (rng.uniform() - 0.5));
        const double log_ratio = 3.0 * p.eta * (2.0 * rng.uniform() - 1.0);  // log(v_self / v_next)
        const double v_next = v_self / std::exp(log_ratio);
        const double z_star = vp.constants().zeta0 + log_ratio / p.eta;
        const double value = -vp.constants().c0 * v_self * std::exp(p.k / (p.sigma * p.eta) * log_ratio);

        const double step = 1e-4, lo = z_star - 5.0;
        const long n = static_cast<long>(10.0 / step);
        long best = 0;
        double best_v = -INFINITY;
        for (long j = 0; j <= n; ++j) {
            const double v = phi(lo + j * step, v_next, v_self, p, p.delta_inf);
            if (v > best_v) best_v = v, best = j;
        }
        const double z0 = lo + best * step;
        const double fm = phi(z0 - step, v_next, v_self, p, p.delta_inf);
        const double fp = phi(z0 + step, v_next, v_self, p, p.delta_inf);
        const double z = z0 + 0.5 * step * (fm - fp) / (fm - 2.0 * best_v + fp);
        arg_err = std::max(arg_err, std::abs(z - z_star));
        val_err = std::max(val_err, std::abs(phi(z, v_next, v_self, p, p.delta_inf) / value - 1.0));
    }
    o.require(arg_err <= 1e-6, "argmax max abs diff " + num(arg_err));
    o.require(val_err <= 1e-8, "value max rel diff " + num(val_err));
}

void utility_consistency(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const ValidatedParams vp = desk(10, 60.0);
    const ContractPolicy pol = build_policy(vp, PolicyKind::contracted);
    const UtilityCheck u = utility_check(pol, 100000, kSeed);
    o.require(!u.agent.inconclusive && std::abs(u.agent.z_score) <= 3.0,
              "agent MC " + num(u.agent.mc, 6) + " vs " + num(u.agent.closed, 6) + " z=" + num(u.agent.z_score, 3));
    o.require(!u.exchange.inconclusive && std::abs(u.exchange.z_score) <= 3.0,
              "exchange MC " + num(u.exchange.mc, 6) + " vs " + num(u.exchange.closed, 6) +
                  " z=" + num(u.exchange.z_score, 3));
    const double secs = seconds_since(t0);
    o.require(secs < 300.0, "runtime " + num(secs, 3) + " s");
}

void full_scale_orderings(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const ValidatedParams vp = desk(50);
    const auto times = uniform_grid(vp.model().T, 61);
    ExperimentSpec spec{{NamedPolicy{"contracted", build_policy(vp, PolicyKind::contracted)},
                         NamedPolicy{"benchmark", build_policy(vp, PolicyKind::benchmark)}},
                        5000,
                        kSeed,
                        times,
                        {}};
    const ExperimentStats st = run_experiment(spec);
    const auto& c = st.regime("contracted");
    const auto& b = st.regime("benchmark");

    bool below = true;
    for (std::size_t j = 0; j < times.size(); ++j)
        below = below && c.at(Series::spread, j).mean < b.at(Series::spread, j).mean;
    const auto &cs = c.final(Series::spread), &bs = b.final(Series::spread);
    o.require(below && cs.mean + cs.ci95() < bs.mean - bs.ci95(),
              "spread(T) " + num(cs.mean) + "+-" + num(cs.ci95(), 2) + " vs " + num(bs.mean) + "+-" + num(bs.ci95(), 2));
    const auto &cf = c.final(Series::order_flow), &bf = b.final(Series::order_flow);
    o.require(cf.mean > bf.mean, "flow(T) " + num(cf.mean) + " vs " + num(bf.mean));
    const auto &cp = c.final(Series::total_pnl), &bp = b.final(Series::total_pnl);
    o.require(cp.mean > bp.mean, "total P&L(T) " + num(cp.mean) + " vs " + num(bp.mean));

    const TradingCostResult tc = trading_cost_experiment(vp, std::nullopt, 5000, kSeed, times);
    o.require(std::abs(tc.calibrated_A - 0.9) <= 0.1, "calibrated A " + num(tc.calibrated_A));
    const auto& ct = tc.contracted.regimes[0].final(Series::trading_cost);
    const auto& bt = tc.benchmark.regimes[0].final(Series::trading_cost);
    o.require(ct.mean + ct.ci95() < bt.mean - bt.ci95(),
              "trading cost(T) " + num(ct.mean) + "+-" + num(ct.ci95(), 2) + " vs " + num(bt.mean) + "+-" +
                  num(bt.ci95(), 2));
    const double secs = seconds_since(t0);
    o.require(secs < 900.0, "runtime " + num(secs, 4) + " s");
}

void fee_heuristic(Outcome& o) {
    const FeeSuggestion f = taker_fee_heuristic(desk(50), 1.0);
    o.require(f.approximate == 0.5, "approximation " + num(f.approximate, 17) + ", exact form " + num(f.exact, 8));
}

void first_best_differs(Outcome& o) {
    const ValidatedParams vp = desk(10);
    const FirstBestSolution fb = first_best(vp, -1.0, 0);
    const ValueGrid sb = solve_matrix_exp(regime_spec(vp, Regime::exchange), {0.0, vp.model().T});
    const double sb_log = log_neg_v(sb, 0, 0);
    const double raw = std::abs(-std::exp(fb.log_neg_v0) + std::exp(sb_log));
    o.require(raw > 1e-6, "|v_FB(0,0) - v(0,0)| = " + num(raw));
    o.require(std::abs(fb.log_neg_v0 - sb_log) > 1e-6,
              "log(-v): first best " + num(fb.log_neg_v0, 8) + ", second best " + num(sb_log, 8));
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
        {"solver cross-validation", cross_validation},
        {"boundary and bounds", boundary_and_bounds},
        {"log-ratio scheme", log_ratio_scheme},
        {"single-exchange Nash reduction", nash_reduction},
        {"exchange Hamiltonian closed forms", hamiltonian_closed_forms},
        {"utility consistency", utility_consistency},
        {"full-scale orderings", full_scale_orderings},
        {"fee heuristic", fee_heuristic},
        {"first best differs from second best", first_best_differs},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": "
                  << o.detail.str() << std::endl;
    }
    std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
