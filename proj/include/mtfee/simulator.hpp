#pragma once

#include "mtfee/contract.hpp"

#include <cstdint>
#include <vector>

namespace mtfee {

/// Per-inventory dominating intensities for thinning, one table per side.
/// Built once per policy; shared read-only by every path.
struct ThinningBounds {
    std::vector<double> ask;  ///< indexed by q + q̄; 0 on an inactive side
    std::vector<double> bid;
};

/// Bound λ(min_t δ(t,q) − margin) from quotes sampled on `lattice_nodes`
/// times, capped by the global bound λ(−δ∞) when that is finite. Guards in the
/// simulator reject any acceptance ratio above one, so a too-tight table is
/// reported rather than producing biased arrivals.
ThinningBounds thinning_bounds(const ContractPolicy& policy, int lattice_nodes = 601, double margin = 0.05);

struct SimulationOptions {
    int q0 = 0;
    double s0 = 0.0;
    /// Test hook: keep S constant (the price increments are not drawn).
    bool freeze_price = false;
    /// Subintervals of the composite Simpson rule for ∫H dt between samples.
    int accrual_substeps = 4;
    /// Collect accepted ask arrival times into PathRecord::ask_arrivals.
    bool record_ask_arrivals = false;
};

/// One simulated trajectory sampled on the output grid.
struct PathRecord {
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    PolicyKind regime = PolicyKind::constant;

    std::vector<double> times;
    std::vector<double> S, X, PL, Y, exchange_pnl, trading_cost;
    std::vector<long> Na, Nb;
    std::vector<int> Q;
    /// δᵃ+δᵇ at (t, Q_t); NaN when one side is switched off by the barrier.
    std::vector<double> spread;

    /// Running totals over the whole path, for the accounting identity.
    double int_q_ds = 0.0;
    double ask_income = 0.0;  ///< Σ δᵃ over ask fills; equals the final trading cost
    double bid_income = 0.0;
    long candidates = 0;
    std::vector<double> ask_arrivals;
};

/// Event-driven path: thinned arrivals, exact Gaussian price at event and
/// output times, contract accrual with the jump at the pre-fill inventory.
/// The RNG stream is Rng(master_seed, path_index).
PathRecord simulate_path(const ContractPolicy& policy, const ThinningBounds& bounds, std::uint64_t master_seed,
                         std::uint64_t path_index, const std::vector<double>& output_times,
                         const SimulationOptions& options = {});

/// Convenience overload building the thinning table itself.
PathRecord simulate_path(const ContractPolicy& policy, std::uint64_t master_seed, std::uint64_t path_index,
                         const std::vector<double>& output_times, const SimulationOptions& options = {});

}  // namespace mtfee
