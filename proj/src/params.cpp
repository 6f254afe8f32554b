#include "mtfee/params.hpp"

#include "mtfee/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace mtfee {

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::invalid_argument([&] {
          std::string msg;
          for (const auto& v : violations) {
              if (!msg.empty()) msg += "; ";
              msg += v;
          }
          return msg;
      }()),
      violations_(std::move(violations)) {}

DerivedConstants compute_constants(const ModelParams& p) {
    DerivedConstants d;
    const double alpha = p.sigma * p.gamma / p.k;
    const double beta = p.sigma * p.eta / p.k;
    const double n = p.n_exchanges;

    // 1 - σ²γη/((k+σγ)(k+ση)) written in the dimensionless form αβ/((1+α)(1+β))
    const double k_factor = 1.0 - alpha * beta / ((1.0 + alpha) * (1.0 + beta));
    d.log_k_factor = std::log(k_factor);

    d.c0 = p.A * beta * std::exp(-std::log1p(alpha) / alpha + (1.0 + 1.0 / beta) * d.log_k_factor);
    d.c1 = p.k * p.gamma * p.eta * p.sigma / (2.0 * (p.gamma + p.eta));
    d.c1_prime = p.k * d.c0 / (p.sigma * p.eta);

    d.c_n = p.k * p.gamma * p.eta * p.sigma / (2.0 * (n * p.gamma + p.eta));
    d.c_n_hat = d.c0 * std::exp((n - 1.0) * p.k / (p.sigma * p.eta)) *
                (p.sigma * p.gamma + (p.sigma * p.eta + p.k) / n) /
                (p.sigma * p.gamma + p.sigma * p.eta + p.k);
    d.c_n_prime = d.c_n_hat * p.k * n / (p.sigma * p.eta);

    d.gamma_fb = p.gamma * p.eta / (p.gamma + p.eta);
    const double alpha_fb = p.sigma * d.gamma_fb / p.k;

    d.c1_tilde = p.sigma * p.gamma * p.k / 2.0;
    d.c1_fb = p.sigma * d.gamma_fb * p.k / 2.0;
    if (p.benchmark_constants == ConstantsForm::literal) {
        d.c1_tilde_prime = p.A * std::exp(-(1.0 + alpha) * std::log1p(alpha));
        d.c1_tilde_fb = p.A * std::exp(-(1.0 + alpha_fb) * std::log1p(alpha_fb));
    } else {
        d.c1_tilde_prime =
            p.A * std::exp(-p.k * p.c / p.sigma - (1.0 + 1.0 / alpha) * std::log1p(alpha));
        d.c1_tilde_fb = p.A * std::exp(-(1.0 + 1.0 / alpha_fb) * std::log1p(alpha_fb));
    }

    d.zeta0 = p.c + d.log_k_factor / p.eta;
    d.c_inf = p.c + (1.0 / p.eta + 1.0 / p.gamma) * std::log1p(alpha) - d.log_k_factor / p.eta;
    const double qb = p.q_bar;
    d.delta_cap = d.c_inf + (p.sigma / p.k) * (2.0 * d.c1_prime + d.c1 * qb * qb) * p.T;
    return d;
}

ModelParams ModelParams::with_default_delta_inf() const {
    ModelParams out = *this;
    out.delta_inf = compute_constants(*this).delta_cap + 1.0;
    return out;
}

ValidatedParams::ValidatedParams(const ModelParams& model, const DerivedConstants& constants)
    : model_(model),
      constants_(constants),
      spread_offset_(std::log1p(model.sigma * model.gamma / model.k) / model.gamma),
      side_value_(model.sigma / (model.k + model.sigma * model.gamma)) {}

ValidatedParams validate(const ModelParams& p) {
    std::vector<std::string> errors;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) errors.push_back(std::string(name) + " must be positive");
    };
    positive(p.sigma, "sigma");
    positive(p.A, "A");
    positive(p.k, "k");
    positive(p.gamma, "gamma");
    positive(p.eta, "eta");
    positive(p.T, "T");
    positive(p.tick, "tick");
    if (!(p.c >= 0.0) || !std::isfinite(p.c)) errors.push_back("c must be non-negative");
    if (p.q_bar < 1) errors.push_back("q_bar must be at least 1");
    if (p.n_exchanges < 1) errors.push_back("n_exchanges must be at least 1");
    // A NaN bound usually follows from the errors above (the default is derived from them).
    if (std::isnan(p.delta_inf) && errors.empty()) errors.push_back("delta_inf must be set");
    if (!errors.empty()) throw ValidationError(std::move(errors));

    const DerivedConstants d = compute_constants(p);
    if (!(p.delta_inf >= d.delta_cap)) {
        std::ostringstream os;
        os.precision(10);
        os << "delta_inf below Δ∞ (delta_inf=" << p.delta_inf << ", Δ∞=" << d.delta_cap << ")";
        errors.push_back(os.str());
    }
    const double all[] = {d.c0, d.c1, d.c1_prime, d.c1_tilde, d.c1_tilde_prime, d.c_n,
                          d.c_n_prime, d.c_n_hat, d.gamma_fb, d.c1_fb, d.c1_tilde_fb, d.c_inf};
    if (std::any_of(std::begin(all), std::end(all), [](double v) { return !(v > 0.0) || !std::isfinite(v); }))
        errors.push_back("derived constants not finite and positive (parameters out of range)");
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return ValidatedParams(p, d);
}

double intensity(double delta, const ValidatedParams& vp) {
    const auto& p = vp.model();
    if (!(std::abs(delta) <= p.delta_inf))
        throw ValidationError("spread outside [-delta_inf, delta_inf]");
    return intensity_unbounded(delta, p);
}

double spread_map(double z, const ValidatedParams& vp) {
    const double bound = vp.model().delta_inf;
    return std::clamp(-z + vp.spread_offset(), -bound, bound);
}

double side_objective(double delta, double z, const ValidatedParams& vp) {
    const auto& p = vp.model();
    return intensity_unbounded(delta, p) * (-std::expm1(-p.gamma * (z + delta))) / p.gamma;
}

double hamiltonian(const IncentiveTriple& z, int q, const ValidatedParams& vp) {
    const int qb = vp.model().q_bar;
    if (q < -qb || q > qb) throw ValidationError("inventory outside [-q_bar, q_bar]");
    double h = 0.0;
    if (ask_active(q, qb)) h += side_objective(spread_map(z.a, vp), z.a, vp);
    if (bid_active(q, qb)) h += side_objective(spread_map(z.b, vp), z.b, vp);
    return h;
}

double exchange_side_objective(double zeta, double y_self, double y_next, const ValidatedParams& vp) {
    const auto& p = vp.model();
    const double delta = spread_map(zeta, vp);
    const double mm_gain = -std::expm1(-p.gamma * (zeta + delta)) / p.gamma;
    return intensity_unbounded(delta, p) *
           (y_next * std::exp(p.eta * (zeta - p.c)) - y_self * (1.0 + p.eta * mm_gain));
}

}  // namespace mtfee
