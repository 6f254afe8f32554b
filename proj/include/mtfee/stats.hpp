#pragma once

#include <cmath>
#include <cstdint>

namespace mtfee {

/// Welford accumulator with Chan's pairwise merge. Merging in a fixed order
/// makes the final moments independent of how samples were split into blocks
/// only up to rounding; callers keep the block layout fixed for bit-exactness.
struct RunningStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const RunningStats& o) noexcept {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double d = o.mean - mean;
        const double tot = na + nb;
        mean += d * nb / tot;
        m2 += o.m2 + d * d * na * nb / tot;
        n += o.n;
    }

    double variance() const noexcept { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stddev() const noexcept { return std::sqrt(variance()); }
    double std_error() const noexcept { return n > 0 ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0; }
    /// Normal-approximation 95% half-width.
    double ci95() const noexcept { return 1.96 * std_error(); }
};

/// Paths per reduction block. Fixed so the reduction tree never depends on the
/// thread count.
inline constexpr std::int64_t kBlockSize = 64;

}  // namespace mtfee
