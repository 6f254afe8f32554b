#pragma once

#include "mtfee/contract.hpp"
#include "mtfee/experiment.hpp"
#include "mtfee/solver.hpp"

#include <string>
#include <vector>

namespace mtfee {

/// Columns t,q,log_u; first line is a '#' comment echoing regime and constants.
void write_value_grid_csv(const std::string& path, const ValueGrid& grid);
/// Columns t,q,v_plus.
void write_log_ratio_csv(const std::string& path, const LogRatioGrid& grid);
/// Columns t,q,zS,za,zb,ask_spread,bid_spread; absent entries are empty cells.
void write_policy_csv(const std::string& path, const ContractPolicy& policy, const std::vector<double>& times);
/// One row per output time: t, then <series>_mean,<series>_ci95 for every series.
void write_regime_csv(const std::string& path, const RegimeStats& stats);

}  // namespace mtfee
