#include "mtfee/errors.hpp"
#include "mtfee/rng.hpp"
#include "mtfee/solver.hpp"
#include "mtfee/stats.hpp"

#include <omp.h>

#include <cmath>

namespace mtfee {

namespace {

struct BlockResult {
    RunningStats stats;
    bool within = true;
};

/// log of one path's weight exp(∫ −CQ² + C′·(#active) ds) from (t, q) to T.
double path_log_weight(const RegimeSpec& s, double t, int q, Rng& rng) {
    double acc = 0.0;
    while (true) {
        const int active = (ask_active(q, s.q_bar) ? 1 : 0) + (bid_active(q, s.q_bar) ? 1 : 0);
        const double rate = s.c_prime * active;
        const double wait = rate > 0.0 ? rng.exponential(rate) : INFINITY;
        const double stay = std::min(wait, s.T - t);
        acc += (-s.c * static_cast<double>(q) * q + rate) * stay;
        t += stay;
        if (t >= s.T) return acc;
        // Both sides carry rate C′, so a fair coin picks the side; at the barrier only one is open.
        bool down;
        if (active == 2) down = rng.uniform() < 0.5;
        else down = ask_active(q, s.q_bar);
        q += down ? -1 : 1;
    }
}

BlockResult run_block(const RegimeSpec& s, double t, int q, std::int64_t first, std::int64_t last,
                      std::uint64_t seed) {
    BlockResult r;
    const double tau = s.T - t;
    const double lo = s.log_lower(tau) - 1e-9 * (1.0 + std::abs(s.log_lower(tau)));
    const double hi = s.log_upper(tau) + 1e-9 * (1.0 + s.log_upper(tau));
    for (std::int64_t i = first; i < last; ++i) {
        Rng rng(seed, static_cast<std::uint64_t>(i));
        const double lw = path_log_weight(s, t, q, rng);
        if (lw < lo || lw > hi) r.within = false;
        r.stats.add(std::exp(lw));
    }
    return r;
}

void check_args(const RegimeSpec& s, double t, int q, std::int64_t n_paths) {
    if (n_paths < 100) throw ValidationError("solve_mc needs at least 100 paths");
    if (q < -s.q_bar || q > s.q_bar) throw ValidationError("inventory outside [-q_bar, q_bar]");
    if (t < 0.0 || t > s.T) throw ValidationError("time outside [0, T]");
}

McEstimate reduce(const std::vector<BlockResult>& blocks, std::int64_t n_paths) {
    McEstimate e;
    RunningStats total;
    for (const auto& b : blocks) {
        total.merge(b.stats);
        e.within_envelope = e.within_envelope && b.within;
    }
    e.mean = total.mean;
    e.std_error = total.std_error();
    e.n_paths = n_paths;
    return e;
}

}  // namespace

McEstimate solve_mc(const RegimeSpec& spec, double t, int q, std::int64_t n_paths, std::uint64_t seed) {
    check_args(spec, t, q, n_paths);
    const std::int64_t nb = (n_paths + kBlockSize - 1) / kBlockSize;
    std::vector<BlockResult> blocks(static_cast<std::size_t>(nb));
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < nb; ++b)
        blocks[b] = run_block(spec, t, q, b * kBlockSize, std::min(n_paths, (b + 1) * kBlockSize), seed);
    return reduce(blocks, n_paths);
}

McEstimate solve_mc_serial(const RegimeSpec& spec, double t, int q, std::int64_t n_paths, std::uint64_t seed) {
    check_args(spec, t, q, n_paths);
    const std::int64_t nb = (n_paths + kBlockSize - 1) / kBlockSize;
    std::vector<BlockResult> blocks(static_cast<std::size_t>(nb));
    for (std::int64_t b = 0; b < nb; ++b)
        blocks[b] = run_block(spec, t, q, b * kBlockSize, std::min(n_paths, (b + 1) * kBlockSize), seed);
    return reduce(blocks, n_paths);
}

}  // namespace mtfee
