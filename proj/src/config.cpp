#include "mtfee/config.hpp"

#include "mtfee/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mtfee {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ValidationError(key + ": not a number: '" + v + "'");
    return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
    Int out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) throw ValidationError(key + ": not an integer: '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError(key + ": expected true/false, got '" + v + "'");
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "sigma", "A", "k", "c", "gamma", "eta", "T", "q_bar", "delta_inf", "tick", "n_exchanges",
        "benchmark_constants", "paths", "seed", "out", "q0", "R", "y0_source", "y0_form", "regime",
        "time_nodes", "output_nodes", "dt", "series_tol", "nash_sweep", "target_spread", "target_flow",
        "calibrate", "constant_ask", "constant_bid"};
    return keys;
}

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    auto& p = cfg.params;
    if (key == "sigma") p.sigma = to_double(key, v);
    else if (key == "A") p.A = to_double(key, v);
    else if (key == "k") p.k = to_double(key, v);
    else if (key == "c") p.c = to_double(key, v);
    else if (key == "gamma") p.gamma = to_double(key, v);
    else if (key == "eta") p.eta = to_double(key, v);
    else if (key == "T") p.T = to_double(key, v);
    else if (key == "q_bar") p.q_bar = to_int<int>(key, v);
    else if (key == "delta_inf") {
        p.delta_inf = to_double(key, v);
        cfg.delta_inf_given = true;
    } else if (key == "tick") p.tick = to_double(key, v);
    else if (key == "n_exchanges") p.n_exchanges = to_int<int>(key, v);
    else if (key == "benchmark_constants") {
        if (v == "derived") p.benchmark_constants = ConstantsForm::derived;
        else if (v == "literal") p.benchmark_constants = ConstantsForm::literal;
        else throw ValidationError(key + ": expected derived or literal, got '" + v + "'");
    } else if (key == "paths") {
        cfg.n_paths = to_int<std::int64_t>(key, v);
        if (cfg.n_paths < 2) throw ValidationError("paths must be at least 2");
    } else if (key == "seed") cfg.seed = to_int<std::uint64_t>(key, v);
    else if (key == "out") {
        if (v.empty()) throw ValidationError("out must not be empty");
        cfg.output_dir = v;
    } else if (key == "q0") cfg.q0 = to_int<int>(key, v);
    else if (key == "R") {
        cfg.reservation = to_double(key, v);
        if (!(cfg.reservation < 0.0)) throw ValidationError("R must be negative");
    } else if (key == "y0_source") {
        if (v == "indifference") cfg.y0_from_reservation = false;
        else if (v == "reservation") cfg.y0_from_reservation = true;
        else throw ValidationError(key + ": expected indifference or reservation, got '" + v + "'");
    } else if (key == "y0_form") {
        if (v == "k_over_sigma") cfg.y0_form = Y0Form::k_over_sigma;
        else if (v == "sigma_over_k") cfg.y0_form = Y0Form::sigma_over_k;
        else throw ValidationError(key + ": expected k_over_sigma or sigma_over_k, got '" + v + "'");
    } else if (key == "regime") {
        static const std::vector<std::string> ok = {"exchange", "benchmark", "nash", "first_best", "contracted",
                                                    "risk_neutral", "constant"};
        if (std::find(ok.begin(), ok.end(), v) == ok.end()) throw ValidationError(key + ": unknown regime '" + v + "'");
        cfg.regime = v;
    } else if (key == "time_nodes") {
        cfg.time_nodes = to_int<int>(key, v);
        if (cfg.time_nodes < 2) throw ValidationError("time_nodes must be at least 2");
    } else if (key == "output_nodes") {
        cfg.output_nodes = to_int<int>(key, v);
        if (cfg.output_nodes < 2) throw ValidationError("output_nodes must be at least 2");
    } else if (key == "dt") {
        cfg.dt = to_double(key, v);
        if (!(cfg.dt > 0.0)) throw ValidationError("dt must be positive");
    } else if (key == "series_tol") {
        cfg.series_tol = to_double(key, v);
        if (!(cfg.series_tol > 0.0)) throw ValidationError("series_tol must be positive");
    } else if (key == "nash_sweep") {
        cfg.nash_sweep.clear();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const int n = to_int<int>(key, trim(item));
            if (n < 1) throw ValidationError("nash_sweep entries must be at least 1");
            cfg.nash_sweep.push_back(n);
        }
        if (cfg.nash_sweep.empty()) throw ValidationError("nash_sweep must list at least one N");
    } else if (key == "target_spread") cfg.target_spread = to_double(key, v);
    else if (key == "target_flow") {
        if (v == "benchmark") cfg.target_flow.reset();
        else cfg.target_flow = to_double(key, v);
    } else if (key == "calibrate") cfg.calibrate = to_bool(key, v);
    else if (key == "constant_ask") cfg.constant_ask = to_double(key, v);
    else if (key == "constant_bid") cfg.constant_bid = to_double(key, v);
    else throw ValidationError("unknown config key '" + key + "'");
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    std::vector<std::string> errors;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = path + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string::npos) {
            errors.push_back(where + "expected key=value");
            continue;
        }
        try {
            apply_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
        } catch (const ValidationError& e) {
            errors.push_back(where + e.what());
        }
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
}

void finalize_config(RunConfig& cfg) {
    if (!cfg.delta_inf_given) cfg.params = cfg.params.with_default_delta_inf();
}

std::string config_echo(const RunConfig& cfg) {
    const auto& p = cfg.params;
    std::ostringstream os;
    os << "sigma=" << fmt(p.sigma) << "\nA=" << fmt(p.A) << "\nk=" << fmt(p.k) << "\nc=" << fmt(p.c)
       << "\ngamma=" << fmt(p.gamma) << "\neta=" << fmt(p.eta) << "\nT=" << fmt(p.T) << "\nq_bar=" << p.q_bar
       << "\ndelta_inf=" << fmt(p.delta_inf) << "\ntick=" << fmt(p.tick) << "\nn_exchanges=" << p.n_exchanges
       << "\nbenchmark_constants=" << (p.benchmark_constants == ConstantsForm::literal ? "literal" : "derived")
       << "\npaths=" << cfg.n_paths << "\nseed=" << cfg.seed << "\nout=" << cfg.output_dir << "\nq0=" << cfg.q0
       << "\nR=" << fmt(cfg.reservation) << "\ny0_source=" << (cfg.y0_from_reservation ? "reservation" : "indifference")
       << "\ny0_form=" << (cfg.y0_form == Y0Form::k_over_sigma ? "k_over_sigma" : "sigma_over_k")
       << "\nregime=" << cfg.regime << "\ntime_nodes=" << cfg.time_nodes << "\noutput_nodes=" << cfg.output_nodes
       << "\ndt=" << fmt(cfg.dt) << "\nseries_tol=" << fmt(cfg.series_tol) << "\nnash_sweep=";
    for (std::size_t i = 0; i < cfg.nash_sweep.size(); ++i) os << (i ? "," : "") << cfg.nash_sweep[i];
    os << "\ntarget_spread=" << fmt(cfg.target_spread)
       << "\ntarget_flow=" << (cfg.target_flow ? fmt(*cfg.target_flow) : std::string("benchmark"))
       << "\ncalibrate=" << (cfg.calibrate ? "true" : "false") << "\nconstant_ask=" << fmt(cfg.constant_ask)
       << "\nconstant_bid=" << fmt(cfg.constant_bid) << "\n";
    return os.str();
}

}  // namespace mtfee
