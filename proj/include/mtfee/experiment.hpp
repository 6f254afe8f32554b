#pragma once

#include "mtfee/contract.hpp"
#include "mtfee/simulator.hpp"
#include "mtfee/stats.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mtfee {

enum class Series { spread, order_flow, ask_flow, mm_pnl, exchange_pnl, total_pnl, trading_cost, inventory };
inline constexpr std::size_t kSeriesCount = 8;
const char* series_name(Series s);
inline constexpr std::array<Series, kSeriesCount> kAllSeries = {
    Series::spread, Series::order_flow, Series::ask_flow, Series::mm_pnl,
    Series::exchange_pnl, Series::total_pnl, Series::trading_cost, Series::inventory};

/// Cross-path moments of every tracked series at every output time.
struct RegimeStats {
    std::string name;
    std::vector<double> times;
    std::array<std::vector<RunningStats>, kSeriesCount> series;

    const RunningStats& at(Series s, std::size_t time_index) const {
        return series[static_cast<std::size_t>(s)].at(time_index);
    }
    const RunningStats& final(Series s) const { return series[static_cast<std::size_t>(s)].back(); }
};

struct ExperimentStats {
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<RegimeStats> regimes;

    const RegimeStats& regime(const std::string& name) const;
};

struct NamedPolicy {
    std::string name;
    ContractPolicy policy;
};

struct ExperimentSpec {
    std::vector<NamedPolicy> regimes;
    std::int64_t n_paths = 5000;
    std::uint64_t seed = 1;
    std::vector<double> output_times;
    SimulationOptions sim;
};

/// Paired simulation: path i of every regime uses stream (seed, i).
/// Paths are grouped in fixed blocks of kBlockSize; blocks run under OpenMP
/// and are merged in block order, so the statistics are bit-identical for any
/// thread count.
ExperimentStats run_experiment(const ExperimentSpec& spec);
/// Same blocks, same merge order, one thread, no OpenMP.
ExperimentStats run_experiment_serial(const ExperimentSpec& spec);

/// How to derive the policies a workflow needs from validated parameters.
struct PolicyOptions {
    int time_nodes = 1001;
    int q0 = 0;
    Y0Form y0_form = Y0Form::k_over_sigma;
    /// If set, Ŷ₀ = −(1/γ)log(−R); otherwise the indifference transfer is used.
    std::optional<double> reservation;
};

/// Builds the value grid (if any) and the policy of one regime, with Ŷ₀ set.
ContractPolicy build_policy(const ValidatedParams& vp, PolicyKind kind, const PolicyOptions& opt = {});

struct CalibrationStep {
    double A = 0;
    double ask_flow = 0;
};

struct TradingCostResult {
    double target_flow = 0;
    double tolerance = 0;
    double calibrated_A = 0;
    int iterations = 0;
    std::vector<CalibrationStep> trace;
    ExperimentStats benchmark;   ///< benchmark at the configured A
    ExperimentStats contracted;  ///< contracted at the calibrated A
};

/// Calibrates the contracted regime's A by bisection so its mean ask flow at T
/// matches `target_flow` (the benchmark's own mean when not given) within the
/// benchmark's 95% half-width, then reports both regimes. Throws
/// NumericalError after 40 bisection steps without convergence.
TradingCostResult trading_cost_experiment(const ValidatedParams& vp, std::optional<double> target_flow,
                                          std::int64_t n_paths, std::uint64_t seed,
                                          const std::vector<double>& output_times, const PolicyOptions& opt = {});

struct UtilitySide {
    double mc = 0;
    double std_error = 0;
    double closed = 0;
    double z_score = 0;
    /// Relative standard error above 50%: the estimate says nothing.
    bool inconclusive = false;
};

struct UtilityCheck {
    UtilitySide agent;
    UtilitySide exchange;
    std::int64_t n_paths = 0;
};

/// MC of E[−e^{−γ(ξ̂+PL_T)}] and E[−e^{−η(c(Nᵃ+Nᵇ)−ξ̂)}] against their closed forms.
/// Samples are divided by the closed form before averaging, so the z-score is
/// computed on ratios near one and nothing over- or underflows.
UtilityCheck utility_check(const ContractPolicy& policy, std::int64_t n_paths, std::uint64_t seed, int q0 = 0);

}  // namespace mtfee
