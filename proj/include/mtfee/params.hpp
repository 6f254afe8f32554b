#pragma once

#include <cmath>
#include <limits>

namespace mtfee {

/// Which closed forms to use for the no-contract (benchmark) and first-best
/// reductions. `derived` re-derives the Avellaneda-Stoikov constants for the
/// fee-shifted intensity; `literal` uses A(1+α)^{−(1+α)} without the fee
/// factor, and ση/k as the first-best exponent.
enum class ConstantsForm { derived, literal };

/// Exogenous model inputs. Prices and spreads are in ticks, time in seconds.
/// Defaults are the reference experiment set, except delta_inf which has to be
/// filled with `with_default_delta_inf()` (or set explicitly).
struct ModelParams {
    double sigma = 0.3;   ///< volatility, tick * s^-1/2
    double A = 1.5;       ///< base order arrival intensity, 1/s
    double k = 0.3;       ///< intensity decay, s^-1/2
    double c = 0.5;       ///< taker fee, ticks
    double gamma = 0.01;  ///< market-maker risk aversion, 1/tick
    double eta = 1.0;     ///< exchange risk aversion, 1/tick
    double T = 600.0;     ///< horizon, s
    int q_bar = 50;       ///< inventory cap
    double delta_inf = std::numeric_limits<double>::quiet_NaN();  ///< spread bound, ticks
    double tick = 1.0;
    int n_exchanges = 1;
    ConstantsForm benchmark_constants = ConstantsForm::derived;

    /// Copy with delta_inf = Δ∞ + 1, the smallest admissible bound plus one tick.
    ModelParams with_default_delta_inf() const;
};

/// Closed-form constants of the exchange, benchmark, Nash and first-best
/// reductions, plus the admissibility bounds.
struct DerivedConstants {
    double c0 = 0;             ///< exchange Hamiltonian constant
    double c1 = 0;             ///< exchange inventory penalty
    double c1_prime = 0;       ///< exchange coupling
    double c1_tilde = 0;       ///< benchmark inventory penalty
    double c1_tilde_prime = 0; ///< benchmark coupling
    double c_n = 0;            ///< Nash inventory penalty (N = n_exchanges)
    double c_n_prime = 0;      ///< Nash coupling
    double c_n_hat = 0;        ///< Nash Hamiltonian constant
    double gamma_fb = 0;       ///< Γ = γη/(γ+η)
    double c1_fb = 0;          ///< first-best inventory penalty
    double c1_tilde_fb = 0;    ///< first-best coupling
    double zeta0 = 0;          ///< optimal incentive shift
    double c_inf = 0;          ///< C∞
    double delta_cap = 0;      ///< Δ∞
    double log_k_factor = 0;   ///< log(1 - σ²γη/((k+σγ)(k+ση))), shared by several formulas
};

/// Evaluates every constant from raw parameters. No validation: callers that
/// did not go through `validate` get whatever the formulas produce.
DerivedConstants compute_constants(const ModelParams& p);

/// Parameters that passed `validate`, with their constants attached.
class ValidatedParams {
public:
    const ModelParams& model() const noexcept { return model_; }
    const DerivedConstants& constants() const noexcept { return constants_; }

    double kappa() const noexcept { return model_.k / model_.sigma; }
    /// (1/γ) log(1 + σγ/k): the market maker's unclamped spread at zero incentive.
    double spread_offset() const noexcept { return spread_offset_; }
    /// σ/(k+σγ): per-fill value of an unclamped side in the market-maker Hamiltonian.
    double side_value() const noexcept { return side_value_; }

private:
    friend ValidatedParams validate(const ModelParams& params);
    ValidatedParams(const ModelParams& model, const DerivedConstants& constants);

    ModelParams model_;
    DerivedConstants constants_;
    double spread_offset_;
    double side_value_;
};

/// Checks every invariant and collects all violations into one ValidationError.
ValidatedParams validate(const ModelParams& params);

inline bool ask_active(int q, int q_bar) noexcept { return q > -q_bar; }
inline bool bid_active(int q, int q_bar) noexcept { return q < q_bar; }

/// λ(δ) = A exp(-k(δ+c)/σ). Rejects |δ| > delta_inf.
double intensity(double delta, const ValidatedParams& vp);

/// Same formula without the range check; used for dominating rates.
inline double intensity_unbounded(double delta, const ModelParams& p) noexcept {
    return p.A * std::exp(-p.k * (delta + p.c) / p.sigma);
}

/// Δ(z): the market maker's best response to incentive z, clamped to ±delta_inf.
double spread_map(double z, const ValidatedParams& vp);

struct IncentiveTriple {
    double s = 0;  ///< price-exposure coefficient Zˢ
    double a = 0;  ///< ask fill payment Zᵃ
    double b = 0;  ///< bid fill payment Zᵇ
};

/// One side's contribution to h: λ(δ)(1 - e^{-γ(z+δ)})/γ.
double side_objective(double delta, double z, const ValidatedParams& vp);

/// H(z,q) = sup over the admissible box of h(δ,z,q), evaluated at the maximiser Δ.
/// Sides switched off at the inventory barrier contribute nothing.
double hamiltonian(const IncentiveTriple& z, int q, const ValidatedParams& vp);

/// The exchange's per-side objective h⁰_E(y, y', ζ) with y the value at the
/// current inventory and y' the value after the fill (both negative).
double exchange_side_objective(double zeta, double y_self, double y_next, const ValidatedParams& vp);

}  // namespace mtfee
