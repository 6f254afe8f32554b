#pragma once

#include "mtfee/params.hpp"
#include "mtfee/solver.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mtfee {

struct FirstBestSolution;

enum class PolicyKind { contracted, benchmark, risk_neutral, nash, first_best, constant };

std::string to_string(PolicyKind k);

/// Quotes and incentives at one (t, q). A side that cannot trade at the
/// inventory barrier has neither a spread nor an incentive coefficient.
struct Quote {
    std::optional<double> ask;
    std::optional<double> bid;
    /// Incentives the market maker faces (aggregate over exchanges for nash).
    double zs = 0.0;
    std::optional<double> za;
    std::optional<double> zb;
};

/// Which form of the indifference transfer to use (see README).
enum class Y0Form { k_over_sigma, sigma_over_k };

/// Incentive coefficients and quotes as functions of (t, q) for one regime.
/// Immutable and shareable across threads. Evaluation at any t goes through
/// the grid factorisation, so no interpolation error enters the quotes.
class ContractPolicy {
public:
    PolicyKind kind() const noexcept { return kind_; }
    const ValidatedParams& params() const noexcept { return vp_; }
    /// Number of exchanges sharing the contract (1 except for nash).
    int n_exchanges() const noexcept { return n_; }
    /// Whether the market maker is paid through the accrual process Y.
    bool has_contract() const noexcept { return kind_ != PolicyKind::benchmark && kind_ != PolicyKind::first_best &&
                                                kind_ != PolicyKind::constant; }
    double y0() const noexcept { return y0_; }
    /// Copy with a different initial transfer Ŷ₀ (aggregate).
    ContractPolicy with_y0(double y0) const;

    Quote at(double t, int q) const;
    /// Per-exchange incentives for nash (ζ^{S,0}, ζ^{i,0}); equals `at` otherwise.
    Quote per_exchange(double t, int q) const;

    /// Underlying value grid, if the regime has one.
    const std::shared_ptr<const ValueGrid>& grid() const noexcept { return grid_; }

private:
    friend ContractPolicy contracted_policy(std::shared_ptr<const ValueGrid>, const ValidatedParams&);
    friend ContractPolicy benchmark_policy(std::shared_ptr<const ValueGrid>, const ValidatedParams&);
    friend ContractPolicy risk_neutral_policy(const ValidatedParams&);
    friend ContractPolicy nash_policy(std::shared_ptr<const ValueGrid>, const ValidatedParams&);
    friend ContractPolicy constant_spread_policy(const ValidatedParams&, double, double);
    friend FirstBestSolution first_best(const ValidatedParams&, double, int);

    ContractPolicy(PolicyKind kind, const ValidatedParams& vp) : kind_(kind), vp_(vp) {}

    PolicyKind kind_;
    ValidatedParams vp_;
    std::shared_ptr<const ValueGrid> grid_;
    int n_ = 1;
    double y0_ = 0.0;
    double const_ask_ = 0.0;
    double const_bid_ = 0.0;
};

/// Optimal contract of the exchange, read off the exchange grid.
ContractPolicy contracted_policy(std::shared_ptr<const ValueGrid> grid, const ValidatedParams& vp);
/// No-contract market maker quotes from the benchmark grid.
ContractPolicy benchmark_policy(std::shared_ptr<const ValueGrid> grid, const ValidatedParams& vp);
/// Risk-neutral exchange: constant spreads and full risk transfer Zˢ = −q.
ContractPolicy risk_neutral_policy(const ValidatedParams& vp);
/// Symmetric Nash equilibrium among vp.model().n_exchanges exchanges.
ContractPolicy nash_policy(std::shared_ptr<const ValueGrid> grid, const ValidatedParams& vp);
/// Fixed quotes on both sides, no contract. For simulator tests.
ContractPolicy constant_spread_policy(const ValidatedParams& vp, double ask, double bid);

/// Closed-form per-side spread when the exchange is risk neutral.
double risk_neutral_spread(const ValidatedParams& vp);
/// Risk-neutral fill incentive c + σ/(k+σγ) − σ/k.
double risk_neutral_fill_incentive(const ValidatedParams& vp);
/// ξ̂ written out for the risk-neutral optimisers (barrier never reached):
/// Ŷ₀ + z̄(Nᵃ+Nᵇ) − ∫Q dS − 2λ(δ)σT/(k+σγ).
double risk_neutral_contract(const ValidatedParams& vp, double y0, long n_fills, double int_q_ds);

struct FirstBestSolution {
    double gamma_fb = 0;
    std::shared_ptr<const ValueGrid> grid;  ///< ũ^FB
    ContractPolicy policy;
    double log_neg_v0 = 0;  ///< log(−Ṽ₀)
    double log_lambda = 0;  ///< log λ*
    double reservation = 0;
    /// First-best exchange value V₀^FB as sign · exp(log_abs).
    double value_sign = -1.0;
    double value_log_abs = 0;
    /// ξ* given the terminal P&L X_T + Q_T S_T and total fill count.
    double contract(double terminal_pl, long n_fills) const;
};

/// First-best problem (exchange sets quotes and pays ξ*) with reservation utility R < 0, started at q0.
FirstBestSolution first_best(const ValidatedParams& vp, double reservation, int q0 = 0);

/// Ŷ₀ = −(1/γ) log(−R).
double reservation_y0(double reservation, const ValidatedParams& vp);
/// Indifference transfer from the benchmark grid at (0, q0).
double indifference_y0(const ValueGrid& benchmark, int q0, const ValidatedParams& vp,
                       Y0Form form = Y0Form::k_over_sigma);

struct FeeSuggestion {
    double exact = 0;        ///< −s/2 − (1/η)log(1−σ²γη/((k+σγ)(k+ση))) + (1/γ)log(1+σγ/k)
    double approximate = 0;  ///< σ/k − s/2
};
FeeSuggestion taker_fee_heuristic(const ValidatedParams& vp, double target_spread);

/// Contract accrual state Yₜ.
struct AccrualState {
    double y = 0.0;
    double last_t = 0.0;
};

struct AccrualEvent {
    double dt = 0.0;
    double ds = 0.0;
    bool ask_fill = false;
    bool bid_fill = false;
};

/// One step of dY = Zˢ dS + [½γσ²(Zˢ+q)² − H]dt plus the fill jump, with
/// coefficients frozen at (last_t, q). Rejects fills the barrier forbids.
AccrualState accrue(const AccrualState& state, const ContractPolicy& policy, const AccrualEvent& ev, int q);

/// Drift of Y between fills: ½γσ²(Zˢ+q)² − H(Z, q).
double accrual_drift(const Quote& quote, int q, const ValidatedParams& vp);

}  // namespace mtfee
