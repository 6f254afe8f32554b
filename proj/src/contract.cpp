#include "mtfee/contract.hpp"

#include "mtfee/errors.hpp"

#include <cmath>

namespace mtfee {

std::string to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::contracted: return "contracted";
        case PolicyKind::benchmark: return "benchmark";
        case PolicyKind::risk_neutral: return "risk_neutral";
        case PolicyKind::nash: return "nash";
        case PolicyKind::first_best: return "first_best";
        case PolicyKind::constant: return "constant";
    }
    return "unknown";
}

namespace {

void require_regime(const std::shared_ptr<const ValueGrid>& g, Regime r, const ValidatedParams& vp) {
    if (!g) throw ValidationError("missing value grid");
    if (g->spec().regime != r)
        throw ValidationError("grid regime mismatch: expected " + to_string(r) + ", got " + to_string(g->spec().regime));
    if (g->q_bar() != vp.model().q_bar) throw ValidationError("grid q_bar does not match parameters");
}

/// log u at q−1, q, q+1 (entries beyond the barrier left untouched).
struct Neighbourhood {
    double lo = 0, mid = 0, hi = 0;
};

Neighbourhood neighbourhood(const ValueGrid& g, double t, int q) {
    const int qb = g.q_bar();
    if (q < -qb || q > qb) throw ValidationError("inventory outside [-q_bar, q_bar]");
    const int a = std::max(q - 1, -qb), b = std::min(q + 1, qb);
    double buf[3];
    g.log_u_row(t, a, b, buf);
    Neighbourhood n;
    n.mid = buf[q - a];
    if (q > -qb) n.lo = buf[0];
    if (q < qb) n.hi = buf[b - a];
    return n;
}

}  // namespace

ContractPolicy ContractPolicy::with_y0(double y0) const {
    ContractPolicy p = *this;
    p.y0_ = y0;
    return p;
}

Quote ContractPolicy::per_exchange(double t, int q) const {
    if (kind_ != PolicyKind::nash) return at(t, q);
    const auto& p = vp_.model();
    const int qb = p.q_bar;
    const Neighbourhood l = neighbourhood(*grid_, t, q);
    const double theta = grid_->spec().theta;
    const double log_k = vp_.constants().log_k_factor;
    Quote out;
    out.zs = -p.gamma * q / (p.eta + n_ * p.gamma);
    // log(v(q)/v(q∓1)) = −θ (log u(q) − log u(q∓1))
    if (ask_active(q, qb)) out.za = p.c / n_ + (-theta * (l.mid - l.lo) + log_k) / p.eta;
    if (bid_active(q, qb)) out.zb = p.c / n_ + (-theta * (l.mid - l.hi) + log_k) / p.eta;
    return out;
}

Quote ContractPolicy::at(double t, int q) const {
    const auto& p = vp_.model();
    const int qb = p.q_bar;
    if (q < -qb || q > qb) throw ValidationError("inventory outside [-q_bar, q_bar]");
    Quote out;
    switch (kind_) {
        case PolicyKind::contracted: {
            const Neighbourhood l = neighbourhood(*grid_, t, q);
            const double theta = grid_->spec().theta;
            const double zeta0 = vp_.constants().zeta0;
            out.zs = -p.gamma * q / (p.gamma + p.eta);
            if (ask_active(q, qb)) out.za = zeta0 + (-theta * (l.mid - l.lo)) / p.eta;
            if (bid_active(q, qb)) out.zb = zeta0 + (-theta * (l.mid - l.hi)) / p.eta;
            break;
        }
        case PolicyKind::nash: {
            const Quote e = per_exchange(t, q);
            out.zs = n_ * e.zs;
            if (e.za) out.za = n_ * *e.za;
            if (e.zb) out.zb = n_ * *e.zb;
            break;
        }
        case PolicyKind::risk_neutral: {
            const double z = risk_neutral_fill_incentive(vp_);
            out.zs = -q;
            if (ask_active(q, qb)) out.za = z;
            if (bid_active(q, qb)) out.zb = z;
            break;
        }
        case PolicyKind::benchmark:
        case PolicyKind::first_best: {
            const Neighbourhood l = neighbourhood(*grid_, t, q);
            const double r = p.sigma / p.k;
            double offset = vp_.spread_offset();
            if (kind_ == PolicyKind::first_best) {
                const double g = vp_.constants().gamma_fb;
                offset = -p.c + std::log1p(p.sigma * g / p.k) / g;
            }
            if (ask_active(q, qb)) out.ask = r * (l.mid - l.lo) + offset;
            if (bid_active(q, qb)) out.bid = r * (l.mid - l.hi) + offset;
            return out;
        }
        case PolicyKind::constant:
            if (ask_active(q, qb)) out.ask = const_ask_;
            if (bid_active(q, qb)) out.bid = const_bid_;
            return out;
    }
    if (out.za) out.ask = spread_map(*out.za, vp_);
    if (out.zb) out.bid = spread_map(*out.zb, vp_);
    return out;
}

ContractPolicy contracted_policy(std::shared_ptr<const ValueGrid> grid, const ValidatedParams& vp) {
    require_regime(grid, Regime::exchange, vp);
    ContractPolicy p(PolicyKind::contracted, vp);
    p.grid_ = std::move(grid);
    return p;
}

ContractPolicy benchmark_policy(std::shared_ptr<const ValueGrid> grid, const ValidatedParams& vp) {
    require_regime(grid, Regime::benchmark, vp);
    ContractPolicy p(PolicyKind::benchmark, vp);
    p.grid_ = std::move(grid);
    return p;
}

ContractPolicy nash_policy(std::shared_ptr<const ValueGrid> grid, const ValidatedParams& vp) {
    require_regime(grid, Regime::nash, vp);
    if (grid->spec().n != vp.model().n_exchanges) throw ValidationError("nash grid built for a different N");
    ContractPolicy p(PolicyKind::nash, vp);
    p.n_ = vp.model().n_exchanges;
    p.grid_ = std::move(grid);
    return p;
}

ContractPolicy constant_spread_policy(const ValidatedParams& vp, double ask, double bid) {
    const double cap = vp.model().delta_inf;
    if (std::abs(ask) > cap || std::abs(bid) > cap) throw ValidationError("constant spread outside [-delta_inf, delta_inf]");
    ContractPolicy p(PolicyKind::constant, vp);
    p.const_ask_ = ask;
    p.const_bid_ = bid;
    return p;
}

double risk_neutral_spread(const ValidatedParams& vp) {
    const auto& p = vp.model();
    return p.sigma / p.k - vp.side_value() + vp.spread_offset() - p.c;
}

double risk_neutral_fill_incentive(const ValidatedParams& vp) {
    const auto& p = vp.model();
    return p.c + vp.side_value() - p.sigma / p.k;
}

ContractPolicy risk_neutral_policy(const ValidatedParams& vp) {
    const double spread = risk_neutral_spread(vp);
    if (!(vp.model().delta_inf >= spread))
        throw ValidationError("delta_inf below the risk-neutral spread " + std::to_string(spread));
    return ContractPolicy(PolicyKind::risk_neutral, vp);
}

double risk_neutral_contract(const ValidatedParams& vp, double y0, long n_fills, double int_q_ds) {
    const auto& p = vp.model();
    const double lambda = intensity(risk_neutral_spread(vp), vp);
    return y0 + risk_neutral_fill_incentive(vp) * static_cast<double>(n_fills) - int_q_ds -
           2.0 * lambda * vp.side_value() * p.T;
}

double reservation_y0(double reservation, const ValidatedParams& vp) {
    if (!(reservation < 0.0)) throw ValidationError("reservation utility R must be negative");
    return -std::log(-reservation) / vp.model().gamma;
}

double indifference_y0(const ValueGrid& benchmark, int q0, const ValidatedParams& vp, Y0Form form) {
    if (benchmark.spec().regime != Regime::benchmark) throw ValidationError("indifference transfer needs the benchmark grid");
    const auto& p = vp.model();
    const double scale = form == Y0Form::k_over_sigma ? p.k / p.sigma : p.sigma / p.k;
    return scale * benchmark.log_u_at(0.0, q0);
}

FeeSuggestion taker_fee_heuristic(const ValidatedParams& vp, double target_spread) {
    if (!(target_spread > 0.0)) throw ValidationError("target spread must be positive");
    const auto& p = vp.model();
    FeeSuggestion f;
    f.exact = -0.5 * target_spread - vp.constants().log_k_factor / p.eta + vp.spread_offset();
    f.approximate = p.sigma / p.k - 0.5 * target_spread;
    return f;
}

FirstBestSolution first_best(const ValidatedParams& vp, double reservation, int q0) {
    if (!(reservation < 0.0)) throw ValidationError("reservation utility R must be negative");
    const auto& p = vp.model();
    if (q0 < -p.q_bar || q0 > p.q_bar) throw ValidationError("q0 outside [-q_bar, q_bar]");
    const RegimeSpec spec = regime_spec(vp, Regime::first_best);
    auto grid = std::make_shared<const ValueGrid>(solve_matrix_exp(spec, uniform_grid(p.T, 101)));

    ContractPolicy policy(PolicyKind::first_best, vp);
    policy.grid_ = grid;

    const double g = vp.constants().gamma_fb;
    const double exponent = p.benchmark_constants == ConstantsForm::literal ? p.sigma * p.eta / p.k : p.sigma * g / p.k;
    const double log_neg_v0 = -exponent * grid->log_u_at(0.0, q0);
    const double log_neg_r = std::log(-reservation);
    const double log_lambda = std::log(p.eta / p.gamma) + (1.0 + p.eta / p.gamma) * (log_neg_v0 - log_neg_r);

    // V₀ = λ*[((η+γ)/η)(η/(λ*γ))^{γ/(η+γ)} Ṽ₀ − R] = λ*(−R)(1 − m)
    const double log_m = std::log((p.eta + p.gamma) / p.eta) +
                         p.gamma / (p.eta + p.gamma) * (std::log(p.eta / p.gamma) - log_lambda) + log_neg_v0 - log_neg_r;
    const double one_minus_m = -std::expm1(log_m);

    return FirstBestSolution{
        .gamma_fb = g,
        .grid = grid,
        .policy = policy,
        .log_neg_v0 = log_neg_v0,
        .log_lambda = log_lambda,
        .reservation = reservation,
        .value_sign = one_minus_m >= 0.0 ? 1.0 : -1.0,
        .value_log_abs = log_lambda + log_neg_r + std::log(std::abs(one_minus_m)),
    };
}

double FirstBestSolution::contract(double terminal_pl, long n_fills) const {
    const auto& p = policy.params().model();
    return (log_lambda + std::log(p.gamma / p.eta) - p.gamma * terminal_pl + p.eta * p.c * static_cast<double>(n_fills)) /
           (p.eta + p.gamma);
}

double accrual_drift(const Quote& quote, int q, const ValidatedParams& vp) {
    const auto& p = vp.model();
    const IncentiveTriple z{quote.zs, quote.za.value_or(0.0), quote.zb.value_or(0.0)};
    const double risk = quote.zs + q;
    return 0.5 * p.gamma * p.sigma * p.sigma * risk * risk - hamiltonian(z, q, vp);
}

AccrualState accrue(const AccrualState& state, const ContractPolicy& policy, const AccrualEvent& ev, int q) {
    const int qb = policy.params().model().q_bar;
    if (q < -qb || q > qb) throw ValidationError("inventory outside [-q_bar, q_bar]");
    if (ev.ask_fill && ev.bid_fill) throw ValidationError("simultaneous ask and bid fill");
    if (ev.ask_fill && !ask_active(q, qb)) throw ValidationError("ask fill at the lower inventory barrier");
    if (ev.bid_fill && !bid_active(q, qb)) throw ValidationError("bid fill at the upper inventory barrier");
    if (!(ev.dt >= 0.0)) throw ValidationError("negative accrual step");
    AccrualState out = state;
    out.last_t = state.last_t + ev.dt;
    if (!policy.has_contract()) return out;
    const Quote z = policy.at(state.last_t, q);
    out.y += z.zs * ev.ds + accrual_drift(z, q, policy.params()) * ev.dt;
    if (ev.ask_fill || ev.bid_fill) {
        // The jump is paid at the fill time with the pre-fill inventory.
        const Quote j = policy.at(out.last_t, q);
        out.y += ev.ask_fill ? *j.za : *j.zb;
    }
    return out;
}

}  // namespace mtfee
