#pragma once

#include "mtfee/contract.hpp"
#include "mtfee/params.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mtfee {

/// Everything one CLI run needs. Model fields default to the reference set;
/// run fields default to the values used for the headline experiments.
struct RunConfig {
    ModelParams params;
    std::string command;

    std::int64_t n_paths = 5000;
    std::uint64_t seed = 20180417;
    std::string output_dir = "out";

    int q0 = 0;
    double reservation = -1.0;           ///< R, used by firstbest and by y0_source=reservation
    bool y0_from_reservation = false;    ///< Ŷ₀ from R instead of the indifference transfer
    Y0Form y0_form = Y0Form::k_over_sigma;
    std::string regime = "exchange";     ///< solve: value regime; simulate: policy
    int time_nodes = 1001;
    int output_nodes = 61;
    double dt = 0.01;
    double series_tol = 1e-12;
    std::vector<int> nash_sweep = {1, 2, 4, 8};
    double target_spread = 1.0;
    std::optional<double> target_flow;
    bool calibrate = true;
    double constant_ask = 0.5;
    double constant_bid = 0.5;

    /// Set by load/apply when delta_inf was given explicitly.
    bool delta_inf_given = false;
};

/// All recognised keys, in manifest order.
const std::vector<std::string>& config_keys();

/// Applies one key=value pair. Unknown keys and malformed values throw ValidationError.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads a flat key=value file ('#' starts a comment; blank lines ignored).
/// Every problem in the file is collected into one ValidationError.
void load_config_file(RunConfig& cfg, const std::string& path);

/// Fills delta_inf with Δ∞ + 1 unless it was given. Call after all overrides.
void finalize_config(RunConfig& cfg);

/// key=value text that, fed back through load_config_file, reproduces the run.
std::string config_echo(const RunConfig& cfg);

}  // namespace mtfee
