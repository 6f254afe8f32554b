#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace mtfee {

/// splitmix64 finaliser, used to expand seeds into generator state.
inline std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** with helpers for the three distributions the simulators need.
///
/// A path's stream is a pure function of (master_seed, path_index): the pair is
/// hashed through splitmix64 and the result seeds the four state words. Paths
/// therefore see the same draws no matter which thread runs them, and two
/// regimes run with the same seed set share their random numbers.
class Rng {
public:
    Rng(std::uint64_t master_seed, std::uint64_t stream) noexcept {
        std::uint64_t x = master_seed;
        std::uint64_t mixed = splitmix64(x) ^ (stream * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL);
        for (auto& w : s_) w = splitmix64(mixed);
    }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

    /// Standard normal by Box-Muller; the second variate is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double a = 2.0 * M_PI * uniform();
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mtfee
