#include "mtfee/solver.hpp"

#include "mtfee/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mtfee {

std::string to_string(Regime r) {
    switch (r) {
        case Regime::exchange: return "exchange";
        case Regime::benchmark: return "benchmark";
        case Regime::nash: return "nash";
        case Regime::first_best: return "first_best";
    }
    return "unknown";
}

Regime parse_regime(const std::string& name) {
    if (name == "exchange") return Regime::exchange;
    if (name == "benchmark") return Regime::benchmark;
    if (name == "nash") return Regime::nash;
    if (name == "first_best") return Regime::first_best;
    throw ValidationError("unknown regime '" + name + "'");
}

RegimeSpec regime_spec(const ValidatedParams& vp, Regime regime) {
    const auto& p = vp.model();
    const auto& d = vp.constants();
    RegimeSpec s;
    s.regime = regime;
    s.T = p.T;
    s.q_bar = p.q_bar;
    switch (regime) {
        case Regime::exchange:
            s.c = d.c1;
            s.c_prime = d.c1_prime;
            s.theta = p.sigma * p.eta / p.k;
            break;
        case Regime::benchmark:
            s.c = d.c1_tilde;
            s.c_prime = d.c1_tilde_prime;
            break;
        case Regime::nash:
            s.c = d.c_n;
            s.c_prime = d.c_n_prime;
            s.n = p.n_exchanges;
            s.theta = p.sigma * p.eta / (p.k * p.n_exchanges);
            break;
        case Regime::first_best:
            s.c = d.c1_fb;
            s.c_prime = d.c1_tilde_fb;
            break;
    }
    return s;
}

std::shared_ptr<const SymTridiagExp> factor_generator(const RegimeSpec& spec) {
    std::vector<double> diag(2 * static_cast<std::size_t>(spec.q_bar) + 1);
    for (int q = -spec.q_bar; q <= spec.q_bar; ++q)
        diag[static_cast<std::size_t>(q + spec.q_bar)] = -spec.c * static_cast<double>(q) * q;
    return std::make_shared<const SymTridiagExp>(std::move(diag), spec.c_prime);
}

ValueGrid::ValueGrid(RegimeSpec spec, std::vector<double> times, std::vector<double> log_u,
                     std::shared_ptr<const SymTridiagExp> factor)
    : spec_(spec), times_(std::move(times)), log_u_(std::move(log_u)), factor_(std::move(factor)) {}

double ValueGrid::log_u(std::size_t time_index, int q) const {
    if (q < -spec_.q_bar || q > spec_.q_bar) throw ValidationError("inventory outside [-q_bar, q_bar]");
    return log_u_.at(time_index * static_cast<std::size_t>(width()) + static_cast<std::size_t>(q + spec_.q_bar));
}

double ValueGrid::log_u_at(double t, int q) const {
    double out;
    log_u_row(t, q, q, &out);
    return out;
}

void ValueGrid::log_u_row(double t, int q_lo, int q_hi, double* out) const {
    if (q_lo < -spec_.q_bar || q_hi > spec_.q_bar || q_lo > q_hi)
        throw ValidationError("inventory range outside [-q_bar, q_bar]");
    const double tau = std::max(0.0, spec_.T - t);
    factor_->log_apply_ones(tau, q_lo + spec_.q_bar, q_hi + spec_.q_bar, out);
}

std::vector<double> uniform_grid(double T, int nodes) {
    if (nodes < 2) throw ValidationError("time grid needs at least 2 nodes");
    std::vector<double> t(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) t[i] = T * static_cast<double>(i) / (nodes - 1);
    t.back() = T;
    return t;
}

ValueGrid solve_matrix_exp(const RegimeSpec& spec, const std::vector<double>& times) {
    if (times.empty()) throw ValidationError("empty time grid");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || times[i] > spec.T) throw ValidationError("time grid outside [0, T]");
        if (i > 0 && !(times[i] > times[i - 1])) throw ValidationError("time grid must be increasing");
    }
    auto factor = factor_generator(spec);
    const std::size_t w = 2 * static_cast<std::size_t>(spec.q_bar) + 1;
    std::vector<double> log_u(times.size() * w);
    for (std::size_t i = 0; i < times.size(); ++i)
        factor->log_apply_ones(spec.T - times[i], 0, static_cast<int>(w) - 1, &log_u[i * w]);
    return ValueGrid(spec, times, std::move(log_u), std::move(factor));
}

namespace {

/// Smallest P with P(Poisson(x) > P) ≤ eps.
int poisson_cutoff(double x, double eps) {
    if (x <= 0.0) return 0;
    // Walk the pmf in log space from the mode outward; the tail beyond any
    // P ≥ x is bounded by pmf(P+1)/(1 − x/(P+2)).
    const int start = static_cast<int>(std::floor(x));
    for (int p = start;; ++p) {
        const double log_pmf = (p + 1) * std::log(x) - x - std::lgamma(p + 2.0);
        const double ratio = x / (p + 2.0);
        if (ratio < 1.0 && log_pmf - std::log1p(-ratio) <= std::log(eps)) return p;
    }
}

struct LogSum {
    double top = -INFINITY;
    double acc = 0.0;
    void add(double log_term) {
        if (log_term > top) {
            acc = acc * std::exp(top - log_term) + 1.0;
            top = log_term;
        } else {
            acc += std::exp(log_term - top);
        }
    }
    double value() const { return top + std::log(acc); }
};

}  // namespace

double solve_series(const RegimeSpec& spec, double t, int q, double tol) {
    if (!(tol > 0.0)) throw ValidationError("series tolerance must be positive");
    if (q < -spec.q_bar || q > spec.q_bar) throw ValidationError("inventory outside [-q_bar, q_bar]");
    const double tau = spec.T - t;
    if (tau <= 0.0) return 0.0;
    const double x = spec.c_prime * tau;
    const int cutoff = poisson_cutoff(x, tol / 2.0);
    const double log_x = std::log(x);
    LogSum sum;
    // Terms with |q + j − p| > q̄ vanish, so for each p only 2q̄+1 values of j matter.
    for (int p = 0; p <= cutoff; ++p) {
        for (int m = -spec.q_bar; m <= spec.q_bar; ++m) {
            const int j = p + m - q;
            if (j < 0 || j > cutoff) continue;
            const double log_term = (p + j) * log_x - std::lgamma(p + 1.0) - std::lgamma(j + 1.0) -
                                    spec.c * tau * static_cast<double>(m) * m;
            sum.add(log_term);
        }
    }
    return sum.value();
}

double solve_uniformized(const RegimeSpec& spec, double t, int q, double tol) {
    if (!(tol > 0.0)) throw ValidationError("series tolerance must be positive");
    if (q < -spec.q_bar || q > spec.q_bar) throw ValidationError("inventory outside [-q_bar, q_bar]");
    const double tau = spec.T - t;
    if (tau <= 0.0) return 0.0;
    const int n = 2 * spec.q_bar + 1;
    const double shift = spec.c * spec.q_bar * spec.q_bar;
    std::vector<double> diag(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double qq = i - spec.q_bar;
        diag[i] = shift - spec.c * qq * qq;
    }
    const double norm = shift + 2.0 * spec.c_prime;
    const int qi = q + spec.q_bar;

    // x holds M^k 1 / e^{log_scale}; the k-th term is τ^k/k! (M^k 1)_q.
    std::vector<double> x(static_cast<std::size_t>(n), 1.0), y(static_cast<std::size_t>(n));
    double log_scale = 0.0;
    double log_coef = 0.0;  // log(τ^k / k!)
    LogSum sum;
    sum.add(0.0);
    const double log_tau = std::log(tau);
    for (int k = 1;; ++k) {
        double top = 0.0;
        for (int i = 0; i < n; ++i) {
            double v = diag[i] * x[i];
            if (i > 0) v += spec.c_prime * x[i - 1];
            if (i + 1 < n) v += spec.c_prime * x[i + 1];
            y[i] = v;
            top = std::max(top, v);
        }
        if (top <= 0.0) break;
        for (int i = 0; i < n; ++i) x[i] = y[i] / top;
        log_scale += std::log(top);
        log_coef += log_tau - std::log(static_cast<double>(k));
        const double log_max_term = log_coef + log_scale;  // bound on every component's term
        if (x[qi] > 0.0) sum.add(log_max_term + std::log(x[qi]));
        const double ratio = tau * norm / (k + 1.0);
        if (ratio < 0.5 && log_max_term + std::log(ratio / (1.0 - ratio)) < sum.value() + std::log(tol)) break;
        if (k > 10000000) throw NumericalError("uniformized series did not converge");
    }
    return sum.value() - shift * tau;
}

double value_v(const ValueGrid& grid, std::size_t time_index, int q) {
    return -std::exp(log_neg_v(grid, time_index, q));
}

double log_neg_v(const ValueGrid& grid, std::size_t time_index, int q) {
    if (!grid.spec().has_exponent())
        throw ValidationError("regime " + to_string(grid.spec().regime) + " has no value transformation v");
    return -grid.spec().theta * grid.log_u(time_index, q);
}

}  // namespace mtfee
