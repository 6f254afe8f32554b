#include "mtfee/cli.hpp"

#include "mtfee/contract.hpp"
#include "mtfee/csv.hpp"
#include "mtfee/errors.hpp"
#include "mtfee/experiment.hpp"
#include "mtfee/solver.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace mtfee {

namespace {

const std::vector<std::string> kCommands = {"solve", "spreads", "simulate", "compare",
                                            "nash", "firstbest", "fees", "selfcheck"};

/// Files written by the current run, removed again if the run fails.
class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

    std::string add(const std::string& name) {
        names_.push_back(name);
        return (dir_ / name).string();
    }
    const std::vector<std::string>& names() const { return names_; }

    void remove_all() const {
        std::error_code ec;
        for (const auto& n : names_) fs::remove(dir_ / n, ec);
        if (wrote_manifest_) fs::remove(dir_ / "manifest", ec);
        if (created_dir_) fs::remove(dir_, ec);  // only succeeds if now empty
    }
    void set_created_dir(bool v) { created_dir_ = v; }
    std::string manifest() {
        wrote_manifest_ = true;
        return (dir_ / "manifest").string();
    }

private:
    fs::path dir_;
    std::vector<std::string> names_;
    bool created_dir_ = false;
    bool wrote_manifest_ = false;
};

PolicyOptions policy_options(const RunConfig& cfg) {
    PolicyOptions o;
    o.time_nodes = cfg.time_nodes;
    o.q0 = cfg.q0;
    o.y0_form = cfg.y0_form;
    if (cfg.y0_from_reservation) o.reservation = cfg.reservation;
    return o;
}

PolicyKind policy_kind(const std::string& regime) {
    if (regime == "contracted" || regime == "exchange") return PolicyKind::contracted;
    if (regime == "benchmark") return PolicyKind::benchmark;
    if (regime == "risk_neutral") return PolicyKind::risk_neutral;
    if (regime == "nash") return PolicyKind::nash;
    if (regime == "first_best") return PolicyKind::first_best;
    if (regime == "constant") return PolicyKind::constant;
    throw ValidationError("regime '" + regime + "' cannot be simulated");
}

ContractPolicy make_policy(const ValidatedParams& vp, const RunConfig& cfg, PolicyKind kind) {
    if (kind == PolicyKind::constant) return constant_spread_policy(vp, cfg.constant_ask, cfg.constant_bid);
    if (kind == PolicyKind::first_best) {
        PolicyOptions o = policy_options(cfg);
        o.reservation = cfg.reservation;
        return build_policy(vp, kind, o);
    }
    return build_policy(vp, kind, policy_options(cfg));
}

void cmd_solve(const ValidatedParams& vp, const RunConfig& cfg, Artifacts& art, std::ostream& out) {
    const Regime r = parse_regime(cfg.regime);
    const RegimeSpec spec = regime_spec(vp, r);
    const ValueGrid grid = solve_matrix_exp(spec, uniform_grid(spec.T, cfg.time_nodes));
    write_value_grid_csv(art.add("value_grid_" + cfg.regime + ".csv"), grid);
    const LogRatioGrid lr = solve_log_ratios(spec, cfg.dt);
    write_log_ratio_csv(art.add("log_ratio_" + cfg.regime + ".csv"), lr);
    out << "regime=" << cfg.regime << " C=" << spec.c << " C_prime=" << spec.c_prime << "\n";
    out << "log_u(0," << cfg.q0 << ")=" << grid.log_u(0, cfg.q0) << "\n";
}

void cmd_spreads(const ValidatedParams& vp, const RunConfig& cfg, Artifacts& art, std::ostream& out) {
    const auto opt = policy_options(cfg);
    const ContractPolicy con = build_policy(vp, PolicyKind::contracted, opt);
    const ContractPolicy ben = build_policy(vp, PolicyKind::benchmark, opt);
    const auto times = uniform_grid(vp.model().T, cfg.output_nodes);
    write_policy_csv(art.add("spreads_contracted.csv"), con, times);
    write_policy_csv(art.add("spreads_benchmark.csv"), ben, times);

    std::ofstream f(art.add("spreads_initial.csv"));
    f << std::setprecision(17);
    f << "q,contracted_ask,contracted_bid,contracted_total,benchmark_ask,benchmark_bid,benchmark_total\n";
    const int qb = vp.model().q_bar;
    bool below = true;
    for (int q = -qb + 1; q <= qb - 1; ++q) {
        const Quote a = con.at(0.0, q), b = ben.at(0.0, q);
        const double ct = *a.ask + *a.bid, bt = *b.ask + *b.bid;
        below = below && ct < bt;
        f << q << ',' << *a.ask << ',' << *a.bid << ',' << ct << ',' << *b.ask << ',' << *b.bid << ',' << bt << '\n';
    }
    if (!f) throw ValidationError("error writing spreads_initial.csv");
    out << "y0=" << con.y0() << "\n";
    out << "contracted total spread below benchmark at t=0 for all interior q: " << (below ? "yes" : "no") << "\n";
}

void cmd_simulate(const ValidatedParams& vp, const RunConfig& cfg, Artifacts& art, std::ostream& out) {
    const PolicyKind kind = policy_kind(cfg.regime);
    ExperimentSpec spec{{NamedPolicy{to_string(kind), make_policy(vp, cfg, kind)}},
                        cfg.n_paths,
                        cfg.seed,
                        uniform_grid(vp.model().T, cfg.output_nodes),
                        SimulationOptions{cfg.q0}};
    const ExperimentStats st = run_experiment(spec);
    const RegimeStats& r = st.regimes[0];
    write_regime_csv(art.add("simulate_" + r.name + ".csv"), r);
    for (Series s : kAllSeries)
        out << series_name(s) << "(T)=" << r.final(s).mean << " +- " << r.final(s).ci95() << "\n";
}

void cmd_compare(const ValidatedParams& vp, const RunConfig& cfg, Artifacts& art, std::ostream& out) {
    const auto opt = policy_options(cfg);
    const auto times = uniform_grid(vp.model().T, cfg.output_nodes);
    ExperimentSpec spec{{NamedPolicy{"contracted", build_policy(vp, PolicyKind::contracted, opt)},
                         NamedPolicy{"benchmark", build_policy(vp, PolicyKind::benchmark, opt)}},
                        cfg.n_paths,
                        cfg.seed,
                        times,
                        SimulationOptions{cfg.q0}};
    const ExperimentStats st = run_experiment(spec);
    for (const auto& r : st.regimes) write_regime_csv(art.add("compare_" + r.name + ".csv"), r);
    const auto& c = st.regime("contracted");
    const auto& b = st.regime("benchmark");
    for (Series s : {Series::spread, Series::order_flow, Series::mm_pnl, Series::exchange_pnl, Series::total_pnl})
        out << series_name(s) << "(T): contracted " << c.final(s).mean << " +- " << c.final(s).ci95()
            << ", benchmark " << b.final(s).mean << " +- " << b.final(s).ci95() << "\n";

    if (!cfg.calibrate) return;
    const TradingCostResult tc = trading_cost_experiment(vp, cfg.target_flow, cfg.n_paths, cfg.seed, times, opt);
    write_regime_csv(art.add("tradingcost_benchmark.csv"), tc.benchmark.regimes[0]);
    write_regime_csv(art.add("tradingcost_contracted.csv"), tc.contracted.regimes[0]);
    std::ofstream f(art.add("calibration.csv"));
    f << std::setprecision(17) << "A,ask_flow\n";
    for (const auto& step : tc.trace) f << step.A << ',' << step.ask_flow << '\n';
    if (!f) throw ValidationError("error writing calibration.csv");
    const auto& cc = tc.contracted.regimes[0].final(Series::trading_cost);
    const auto& bc = tc.benchmark.regimes[0].final(Series::trading_cost);
    out << "target ask flow " << tc.target_flow << " +- " << tc.tolerance << ", calibrated A=" << tc.calibrated_A
        << " after " << tc.iterations << " iterations\n";
    out << "trading cost(T): contracted " << cc.mean << " +- " << cc.ci95() << ", benchmark " << bc.mean << " +- "
        << bc.ci95() << "\n";
}

void cmd_nash(const ValidatedParams& vp, const RunConfig& cfg, Artifacts& art, std::ostream& out) {
    std::ofstream f(art.add("nash_summary.csv"));
    f << std::setprecision(17);
    f << "N,zS_per_exchange_q1,zS_total_q1,zeta_ask_q0,total_spread_t0_q0,inventory_part_t0_q0\n";
    const auto times = uniform_grid(vp.model().T, cfg.output_nodes);
    for (int n : cfg.nash_sweep) {
        ModelParams m = vp.model();
        m.n_exchanges = n;
        const ValidatedParams vn = validate(m);
        const ContractPolicy pol = build_policy(vn, PolicyKind::nash, policy_options(cfg));
        write_policy_csv(art.add("nash_N" + std::to_string(n) + ".csv"), pol, times);
        const Quote e1 = pol.per_exchange(0.0, std::min(1, m.q_bar));
        const Quote a1 = pol.at(0.0, std::min(1, m.q_bar));
        const Quote e0 = pol.per_exchange(0.0, 0);
        const Quote a0 = pol.at(0.0, 0);
        const auto& g = *pol.grid();
        const double curv = (m.sigma / m.k) * (2.0 * g.log_u_at(0.0, 0) - g.log_u_at(0.0, 1) - g.log_u_at(0.0, -1));
        const double total = *a0.ask + *a0.bid;
        f << n << ',' << e1.zs << ',' << a1.zs << ',' << *e0.za << ',' << total << ',' << curv << '\n';
        out << "N=" << n << " total spread(0,0)=" << total << " inventory part=" << curv << "\n";
    }
    if (!f) throw ValidationError("error writing nash_summary.csv");
}

void cmd_firstbest(const ValidatedParams& vp, const RunConfig& cfg, Artifacts& art, std::ostream& out) {
    const FirstBestSolution fb = first_best(vp, cfg.reservation, cfg.q0);
    write_value_grid_csv(art.add("firstbest_value_grid.csv"), *fb.grid);
    write_policy_csv(art.add("firstbest_policy.csv"), fb.policy, uniform_grid(vp.model().T, cfg.output_nodes));
    const ValueGrid sb = solve_matrix_exp(regime_spec(vp, Regime::exchange), {0.0, vp.model().T});
    const double sb_log = log_neg_v(sb, 0, cfg.q0);
    std::ofstream f(art.add("firstbest_summary.txt"));
    f << std::setprecision(17);
    f << "Gamma=" << fb.gamma_fb << "\nR=" << fb.reservation << "\nlog_neg_v0_first_best=" << fb.log_neg_v0
      << "\nlog_neg_v0_second_best=" << sb_log << "\nlog_lambda_star=" << fb.log_lambda
      << "\nV0_first_best_sign=" << fb.value_sign << "\nV0_first_best_log_abs=" << fb.value_log_abs << "\n";
    if (!f) throw ValidationError("error writing firstbest_summary.txt");
    out << std::setprecision(12) << "Gamma=" << fb.gamma_fb << "\nlog(-v_FB(0," << cfg.q0 << "))=" << fb.log_neg_v0
        << "\nlog(-v(0," << cfg.q0 << "))=" << sb_log << "\nlog lambda*=" << fb.log_lambda << "\n";
}

void cmd_fees(const ValidatedParams& vp, const RunConfig& cfg, Artifacts& art, std::ostream& out) {
    const FeeSuggestion s = taker_fee_heuristic(vp, cfg.target_spread);
    std::ofstream f(art.add("fees.txt"));
    f << std::setprecision(17) << "target_spread=" << cfg.target_spread << "\nsuggested_c_approx=" << s.approximate
      << "\nsuggested_c_exact=" << s.exact << "\n";
    if (!f) throw ValidationError("error writing fees.txt");
    out << "suggested c = " << s.approximate << " (approximation); exact form " << std::setprecision(10) << s.exact
        << "\n";
}

int cmd_selfcheck(const RunConfig& cfg, Artifacts& art, std::ostream& out) {
    const auto results = run_selfcheck(cfg.params, cfg.seed);
    std::ofstream f(art.add("selfcheck.txt"));
    bool all = true;
    for (const auto& r : results) {
        const std::string line = std::string(r.pass ? "PASS " : "FAIL ") + r.name + ": " + r.detail;
        out << line << "\n";
        f << line << "\n";
        all = all && r.pass;
    }
    if (!f) throw ValidationError("error writing selfcheck.txt");
    return all ? kExitOk : kExitNumerical;
}

void write_manifest(const RunConfig& cfg, Artifacts& art, int status) {
    std::ofstream f(art.manifest());
    f << "version=" << kVersion << "\ncommand=" << cfg.command << "\nstatus=" << status << "\n";
    f << config_echo(cfg);
    f << "artifacts=";
    for (std::size_t i = 0; i < art.names().size(); ++i) f << (i ? "," : "") << art.names()[i];
    f << "\n";
    if (!f) throw ValidationError("cannot write manifest");
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    std::string stage = "validate";
    Artifacts art(cfg.output_dir);
    try {
        if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end())
            throw ValidationError("unknown command '" + cfg.command + "'");
        const ValidatedParams vp = validate(cfg.params);

        stage = "output";
        std::error_code ec;
        const bool existed = fs::exists(cfg.output_dir, ec);
        fs::create_directories(cfg.output_dir, ec);
        if (ec || !fs::is_directory(cfg.output_dir))
            throw ValidationError("output directory '" + cfg.output_dir + "' cannot be created");
        art.set_created_dir(!existed);

        stage = cfg.command;
        int status = kExitOk;
        if (cfg.command == "solve") cmd_solve(vp, cfg, art, out);
        else if (cfg.command == "spreads") cmd_spreads(vp, cfg, art, out);
        else if (cfg.command == "simulate") cmd_simulate(vp, cfg, art, out);
        else if (cfg.command == "compare") cmd_compare(vp, cfg, art, out);
        else if (cfg.command == "nash") cmd_nash(vp, cfg, art, out);
        else if (cfg.command == "firstbest") cmd_firstbest(vp, cfg, art, out);
        else if (cfg.command == "fees") cmd_fees(vp, cfg, art, out);
        else status = cmd_selfcheck(cfg, art, out);

        stage = "manifest";
        write_manifest(cfg, art, status);
        if (status != kExitOk && cfg.command != "selfcheck") art.remove_all();
        return status;
    } catch (const ValidationError& e) {
        art.remove_all();
        err << "error [" << stage << "]: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        art.remove_all();
        err << "error [" << stage << "]: numerical guard: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        art.remove_all();
        err << "error [" << stage << "]: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal make-take fee contracts: solver and market simulator", "mtfee"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::int64_t> paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "flat key=value configuration file");
    app.add_option("--paths", paths, "number of Monte Carlo paths");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--set", sets, "override one key=value (repeatable)");
    app.set_version_flag("--version", kVersion);
    for (const auto& c : kCommands) app.add_subcommand(c)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error [arguments]: " << e.what() << "\n";
        return kExitValidation;
    }

    RunConfig cfg;
    cfg.command = app.get_subcommands().front()->get_name();
    try {
        if (!config_path.empty()) load_config_file(cfg, config_path);
        std::vector<std::string> errors;
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            try {
                if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
                apply_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
            } catch (const ValidationError& e) {
                errors.push_back(e.what());
            }
        }
        if (!errors.empty()) throw ValidationError(std::move(errors));
        if (paths) apply_config_value(cfg, "paths", std::to_string(*paths));
        if (seed) cfg.seed = *seed;
        if (out_dir) apply_config_value(cfg, "out", *out_dir);
        finalize_config(cfg);
    } catch (const ValidationError& e) {
        err << "error [config]: " << e.what() << "\n";
        return kExitValidation;
    }
    return run(cfg, out, err);
}

}  // namespace mtfee
