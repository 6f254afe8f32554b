#include "mtfee/experiment.hpp"

#include "mtfee/errors.hpp"

#include <omp.h>

#include <cmath>
#include <memory>

namespace mtfee {

const char* series_name(Series s) {
    switch (s) {
        case Series::spread: return "spread";
        case Series::order_flow: return "order_flow";
        case Series::ask_flow: return "ask_flow";
        case Series::mm_pnl: return "mm_pnl";
        case Series::exchange_pnl: return "exchange_pnl";
        case Series::total_pnl: return "total_pnl";
        case Series::trading_cost: return "trading_cost";
        case Series::inventory: return "inventory";
    }
    return "unknown";
}

const RegimeStats& ExperimentStats::regime(const std::string& name) const {
    for (const auto& r : regimes)
        if (r.name == name) return r;
    throw ValidationError("no regime '" + name + "' in experiment");
}

namespace {

using Block = std::vector<RegimeStats>;

Block empty_block(const ExperimentSpec& spec) {
    Block b(spec.regimes.size());
    for (std::size_t r = 0; r < spec.regimes.size(); ++r) {
        b[r].name = spec.regimes[r].name;
        b[r].times = spec.output_times;
        for (auto& s : b[r].series) s.assign(spec.output_times.size(), RunningStats{});
    }
    return b;
}

void add_path(RegimeStats& st, const PathRecord& rec) {
    auto series = [&](Series s) -> std::vector<RunningStats>& { return st.series[static_cast<std::size_t>(s)]; };
    for (std::size_t j = 0; j < rec.times.size(); ++j) {
        if (!std::isnan(rec.spread[j])) series(Series::spread)[j].add(rec.spread[j]);
        series(Series::order_flow)[j].add(static_cast<double>(rec.Na[j] + rec.Nb[j]));
        series(Series::ask_flow)[j].add(static_cast<double>(rec.Na[j]));
        series(Series::mm_pnl)[j].add(rec.PL[j] + rec.Y[j]);
        series(Series::exchange_pnl)[j].add(rec.exchange_pnl[j]);
        series(Series::total_pnl)[j].add(rec.PL[j] + rec.Y[j] + rec.exchange_pnl[j]);
        series(Series::trading_cost)[j].add(rec.trading_cost[j]);
        series(Series::inventory)[j].add(static_cast<double>(rec.Q[j]));
    }
}

struct Prepared {
    std::vector<ThinningBounds> bounds;
    std::int64_t n_blocks = 0;
};

Prepared prepare(const ExperimentSpec& spec) {
    if (spec.n_paths < 2) throw ValidationError("an experiment needs at least 2 paths");
    if (spec.regimes.empty()) throw ValidationError("an experiment needs at least one regime");
    if (spec.output_times.empty()) throw ValidationError("empty output grid");
    Prepared p;
    for (const auto& r : spec.regimes) p.bounds.push_back(thinning_bounds(r.policy));
    p.n_blocks = (spec.n_paths + kBlockSize - 1) / kBlockSize;
    return p;
}

Block run_block(const ExperimentSpec& spec, const Prepared& prep, std::int64_t b) {
    Block out = empty_block(spec);
    const std::int64_t last = std::min(spec.n_paths, (b + 1) * kBlockSize);
    for (std::int64_t i = b * kBlockSize; i < last; ++i)
        for (std::size_t r = 0; r < spec.regimes.size(); ++r)
            add_path(out[r], simulate_path(spec.regimes[r].policy, prep.bounds[r], spec.seed,
                                           static_cast<std::uint64_t>(i), spec.output_times, spec.sim));
    return out;
}

ExperimentStats merge(const ExperimentSpec& spec, const std::vector<Block>& blocks) {
    ExperimentStats st;
    st.n_paths = spec.n_paths;
    st.seed = spec.seed;
    st.regimes = empty_block(spec);
    for (const auto& b : blocks)
        for (std::size_t r = 0; r < b.size(); ++r)
            for (std::size_t s = 0; s < kSeriesCount; ++s)
                for (std::size_t j = 0; j < spec.output_times.size(); ++j)
                    st.regimes[r].series[s][j].merge(b[r].series[s][j]);
    return st;
}

}  // namespace

ExperimentStats run_experiment(const ExperimentSpec& spec) {
    const Prepared prep = prepare(spec);
    std::vector<Block> blocks(static_cast<std::size_t>(prep.n_blocks));
    // Exceptions may not cross the parallel region; keep the first by block index.
    std::vector<std::exception_ptr> errors(blocks.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < prep.n_blocks; ++b) {
        try {
            blocks[b] = run_block(spec, prep, b);
        } catch (...) {
            errors[b] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return merge(spec, blocks);
}

ExperimentStats run_experiment_serial(const ExperimentSpec& spec) {
    const Prepared prep = prepare(spec);
    std::vector<Block> blocks;
    blocks.reserve(static_cast<std::size_t>(prep.n_blocks));
    for (std::int64_t b = 0; b < prep.n_blocks; ++b) blocks.push_back(run_block(spec, prep, b));
    return merge(spec, blocks);
}

ContractPolicy build_policy(const ValidatedParams& vp, PolicyKind kind, const PolicyOptions& opt) {
    const auto& p = vp.model();
    const auto times = uniform_grid(p.T, opt.time_nodes);
    auto grid_of = [&](Regime r) {
        return std::make_shared<const ValueGrid>(solve_matrix_exp(regime_spec(vp, r), times));
    };
    auto transfer = [&]() {
        if (opt.reservation) return reservation_y0(*opt.reservation, vp);
        return indifference_y0(*grid_of(Regime::benchmark), opt.q0, vp, opt.y0_form);
    };
    switch (kind) {
        case PolicyKind::contracted: return contracted_policy(grid_of(Regime::exchange), vp).with_y0(transfer());
        case PolicyKind::benchmark: return benchmark_policy(grid_of(Regime::benchmark), vp);
        case PolicyKind::risk_neutral: return risk_neutral_policy(vp).with_y0(transfer());
        case PolicyKind::nash: return nash_policy(grid_of(Regime::nash), vp).with_y0(transfer());
        case PolicyKind::first_best: return first_best(vp, opt.reservation.value_or(-1.0), opt.q0).policy;
        case PolicyKind::constant: break;
    }
    throw ValidationError("constant-spread policies are built with constant_spread_policy");
}

TradingCostResult trading_cost_experiment(const ValidatedParams& vp, std::optional<double> target_flow,
                                          std::int64_t n_paths, std::uint64_t seed,
                                          const std::vector<double>& output_times, const PolicyOptions& opt) {
    if (target_flow && !(*target_flow > 0.0)) throw ValidationError("target flow must be positive");
    TradingCostResult res;

    auto run = [&](const std::string& name, const ContractPolicy& pol) {
        ExperimentSpec spec{{NamedPolicy{name, pol}}, n_paths, seed, output_times, SimulationOptions{opt.q0}};
        return run_experiment(spec);
    };

    res.benchmark = run("benchmark", build_policy(vp, PolicyKind::benchmark, opt));
    const RunningStats& bench_flow = res.benchmark.regimes[0].final(Series::ask_flow);
    res.target_flow = target_flow.value_or(bench_flow.mean);
    res.tolerance = bench_flow.ci95();

    auto evaluate = [&](double A) {
        ModelParams m = vp.model();
        m.A = A;
        const ValidatedParams va = validate(m);
        ExperimentStats st = run("contracted", build_policy(va, PolicyKind::contracted, opt));
        const double flow = st.regimes[0].final(Series::ask_flow).mean;
        res.trace.push_back({A, flow});
        return std::make_pair(flow, std::move(st));
    };
    auto done = [&](double flow) { return std::abs(flow - res.target_flow) <= res.tolerance; };

    constexpr int kMaxIterations = 40;
    const double a0 = vp.model().A;
    auto [f0, s0] = evaluate(a0);
    if (done(f0)) {
        res.calibrated_A = a0;
        res.contracted = std::move(s0);
        return res;
    }
    // Flow is close to proportional to A, so the linear guess starts the search.
    const double guess = a0 * res.target_flow / f0;
    auto [fg, sg] = evaluate(guess);
    if (done(fg)) {
        res.calibrated_A = guess;
        res.contracted = std::move(sg);
        res.iterations = 1;
        return res;
    }
    double lo = guess, hi = guess;
    double f_lo = fg, f_hi = fg;
    int it = 1;
    while (f_lo > res.target_flow && it < kMaxIterations) {
        lo *= 0.97;
        f_lo = evaluate(lo).first;
        ++it;
    }
    while (f_hi < res.target_flow && it < kMaxIterations) {
        hi *= 1.03;
        f_hi = evaluate(hi).first;
        ++it;
    }
    while (it < kMaxIterations) {
        const double mid = 0.5 * (lo + hi);
        auto [fm, sm] = evaluate(mid);
        ++it;
        if (done(fm)) {
            res.calibrated_A = mid;
            res.contracted = std::move(sm);
            res.iterations = it;
            return res;
        }
        (fm < res.target_flow ? lo : hi) = mid;
    }
    throw NumericalError("calibration of A did not converge in 40 iterations");
}

UtilityCheck utility_check(const ContractPolicy& policy, std::int64_t n_paths, std::uint64_t seed, int q0) {
    if (policy.kind() != PolicyKind::contracted) throw ValidationError("utility check needs the contracted policy");
    if (n_paths < 2) throw ValidationError("utility check needs at least 2 paths");
    const auto& vp = policy.params();
    const auto& p = vp.model();
    const auto& grid = *policy.grid();
    const double y0 = policy.y0();
    const double log_neg_v0 = -grid.spec().theta * grid.log_u_at(0.0, q0);
    const ThinningBounds bounds = thinning_bounds(policy);
    const std::vector<double> out_times{0.0, p.T};
    SimulationOptions sim;
    sim.q0 = q0;

    const std::int64_t nb = (n_paths + kBlockSize - 1) / kBlockSize;
    std::vector<std::array<RunningStats, 2>> blocks(static_cast<std::size_t>(nb));
    std::vector<std::exception_ptr> errors(blocks.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < nb; ++b) {
        try {
            const std::int64_t last = std::min(n_paths, (b + 1) * kBlockSize);
            for (std::int64_t i = b * kBlockSize; i < last; ++i) {
                const PathRecord r = simulate_path(policy, bounds, seed, static_cast<std::uint64_t>(i), out_times, sim);
                const double y = r.Y.back();
                const double fees = p.c * static_cast<double>(r.Na.back() + r.Nb.back());
                blocks[b][0].add(std::exp(-p.gamma * (y + r.PL.back() - y0)));
                blocks[b][1].add(std::exp(-p.eta * (fees - y + y0) - log_neg_v0));
            }
        } catch (...) {
            errors[b] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    RunningStats agent, exchange;
    for (const auto& b : blocks) {
        agent.merge(b[0]);
        exchange.merge(b[1]);
    }

    auto side = [](const RunningStats& ratio, double closed) {
        UtilitySide s;
        s.closed = closed;
        s.mc = closed * ratio.mean;
        s.std_error = std::abs(closed) * ratio.std_error();
        s.z_score = ratio.std_error() > 0.0 ? (ratio.mean - 1.0) / ratio.std_error() : 0.0;
        s.inconclusive = !(ratio.std_error() <= 0.5 * std::abs(ratio.mean));
        return s;
    };
    UtilityCheck out;
    out.n_paths = n_paths;
    out.agent = side(agent, -std::exp(-p.gamma * y0));
    out.exchange = side(exchange, -std::exp(p.eta * y0 + log_neg_v0));
    return out;
}

}  // namespace mtfee
