#pragma once

#include "mtfee/params.hpp"
#include "mtfee/tridiag_exp.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace mtfee {

enum class Regime { exchange, benchmark, nash, first_best };

std::string to_string(Regime r);
Regime parse_regime(const std::string& name);

/// The (C, C′) pair of one regime together with the lattice it lives on.
/// u solves ∂t u = C q² u − C′ Σ_neighbours u with u(T,·) = 1.
struct RegimeSpec {
    Regime regime = Regime::exchange;
    double c = 0.0;        ///< inventory penalty C
    double c_prime = 0.0;  ///< coupling C′
    double T = 0.0;
    int q_bar = 0;
    int n = 1;             ///< number of exchanges (nash)
    /// θ with v = −u^{−θ}; zero for regimes that store u only.
    double theta = 0.0;

    bool has_exponent() const noexcept { return theta > 0.0; }
    /// Envelope −C q̄² τ ≤ log u ≤ 2C′τ.
    double log_lower(double tau) const noexcept { return -c * q_bar * q_bar * tau; }
    double log_upper(double tau) const noexcept { return 2.0 * c_prime * tau; }
};

RegimeSpec regime_spec(const ValidatedParams& vp, Regime regime);

/// Generator B of the regime: diagonal −Cq², off-diagonal C′.
std::shared_ptr<const SymTridiagExp> factor_generator(const RegimeSpec& spec);

/// log u on a time × inventory lattice. Row-major: one row per time node,
/// columns q = −q̄..q̄.
class ValueGrid {
public:
    ValueGrid(RegimeSpec spec, std::vector<double> times, std::vector<double> log_u,
              std::shared_ptr<const SymTridiagExp> factor);

    const RegimeSpec& spec() const noexcept { return spec_; }
    const std::vector<double>& times() const noexcept { return times_; }
    int q_bar() const noexcept { return spec_.q_bar; }
    int width() const noexcept { return 2 * spec_.q_bar + 1; }

    double log_u(std::size_t time_index, int q) const;
    /// Exact evaluation at any t in [0, T] through the stored factorisation.
    double log_u_at(double t, int q) const;
    /// log u at q_lo..q_hi (inclusive), any t. Entries outside ±q̄ are not allowed.
    void log_u_row(double t, int q_lo, int q_hi, double* out) const;

    const std::shared_ptr<const SymTridiagExp>& factor() const noexcept { return factor_; }

private:
    RegimeSpec spec_;
    std::vector<double> times_;
    std::vector<double> log_u_;
    std::shared_ptr<const SymTridiagExp> factor_;
};

/// v₊(t,q) = log u(t,q+1) − log u(t,q), q = −q̄..q̄−1.
struct LogRatioGrid {
    RegimeSpec spec;
    std::vector<double> times;   ///< increasing, last = T
    std::vector<double> v_plus;  ///< row-major, width 2q̄

    int width() const noexcept { return 2 * spec.q_bar; }
    double at(std::size_t time_index, int q) const {
        return v_plus[time_index * static_cast<std::size_t>(width()) + static_cast<std::size_t>(q + spec.q_bar)];
    }
};

/// Uniform grid 0 = t0 < … < t_{nodes−1} = T.
std::vector<double> uniform_grid(double T, int nodes);

ValueGrid solve_matrix_exp(const RegimeSpec& spec, const std::vector<double>& times);

/// The double series of the exchange value, truncated where each index's
/// Poisson tail drops below tol/2. Returns log of the sum.
double solve_series(const RegimeSpec& spec, double t, int q, double tol = 1e-12);

/// Independent series for e^{τB}1: Taylor expansion of e^{τ(B + sI)} with the
/// shift s = C q̄² that makes the matrix nonnegative, so every term is positive
/// and no cancellation occurs. Returns log u.
double solve_uniformized(const RegimeSpec& spec, double t, int q, double tol = 1e-14);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    /// Every path's integrand stayed inside the a priori envelope.
    bool within_envelope = true;
};

/// Monte Carlo of the probabilistic representation of u(t,q): a unit-jump walk
/// with rate C′ per active side, weight exp(∫ −CQ² + C′·(#active sides) ds).
/// OpenMP over fixed path blocks; result is independent of the thread count.
McEstimate solve_mc(const RegimeSpec& spec, double t, int q, std::int64_t n_paths, std::uint64_t seed);
/// Single-threaded reference with the identical block reduction.
McEstimate solve_mc_serial(const RegimeSpec& spec, double t, int q, std::int64_t n_paths, std::uint64_t seed);

/// Classical RK4, backward from v₊(T,·) = 0, on a uniform grid of step dt
/// (shrunk so it divides T). Stores at most `max_nodes` time rows.
/// Throws NumericalError naming (t, q) if the blow-up guard trips.
LogRatioGrid solve_log_ratios(const RegimeSpec& spec, double dt, int max_nodes = 1001);

/// v = −u^{−θ}. Rejects regimes without an exponent.
double value_v(const ValueGrid& grid, std::size_t time_index, int q);
/// log(−v) = −θ log u, finite even when v itself underflows.
double log_neg_v(const ValueGrid& grid, std::size_t time_index, int q);

}  // namespace mtfee
