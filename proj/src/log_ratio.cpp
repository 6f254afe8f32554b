#include "mtfee/errors.hpp"
#include "mtfee/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mtfee {

namespace {

/// d v₊ / ds with s = T − t (time to maturity), i.e. minus the t-derivative.
///   ∂t v₊(q) = C(2q+1) − C′[e^{v₊(q+1)}·1{q<q̄−1} + e^{−v₊(q)} − e^{v₊(q)} − e^{−v₊(q−1)}·1{q>−q̄}]
void rhs(const RegimeSpec& s, const std::vector<double>& v, std::vector<double>& out) {
    const int w = 2 * s.q_bar;
    for (int i = 0; i < w; ++i) {
        const int q = i - s.q_bar;
        double bracket = std::exp(-v[i]) - std::exp(v[i]);
        if (i + 1 < w) bracket += std::exp(v[i + 1]);
        if (i > 0) bracket -= std::exp(-v[i - 1]);
        out[i] = -(s.c * (2.0 * q + 1.0) - s.c_prime * bracket);
    }
}

}  // namespace

LogRatioGrid solve_log_ratios(const RegimeSpec& spec, double dt, int max_nodes) {
    if (!(dt > 0.0) || dt > spec.T) throw ValidationError("log-ratio step must satisfy 0 < dt <= T");
    if (max_nodes < 2) throw ValidationError("log-ratio grid needs at least 2 stored nodes");
    const auto steps = static_cast<std::int64_t>(std::ceil(spec.T / dt - 1e-9));
    const double h = spec.T / static_cast<double>(steps);
    const std::int64_t stride = std::max<std::int64_t>(1, (steps + max_nodes - 2) / (max_nodes - 1));
    const int w = 2 * spec.q_bar;
    const double growth = 10.0 * (2.0 * spec.c_prime + spec.c * spec.q_bar * spec.q_bar);

    std::vector<double> v(static_cast<std::size_t>(w), 0.0), k1(v), k2(v), k3(v), k4(v), tmp(v);
    std::vector<double> rows_s;
    std::vector<double> rows;
    auto store = [&](double s) {
        rows_s.push_back(s);
        rows.insert(rows.end(), v.begin(), v.end());
    };
    store(0.0);
    for (std::int64_t n = 1; n <= steps; ++n) {
        rhs(spec, v, k1);
        for (int i = 0; i < w; ++i) tmp[i] = v[i] + 0.5 * h * k1[i];
        rhs(spec, tmp, k2);
        for (int i = 0; i < w; ++i) tmp[i] = v[i] + 0.5 * h * k2[i];
        rhs(spec, tmp, k3);
        for (int i = 0; i < w; ++i) tmp[i] = v[i] + h * k3[i];
        rhs(spec, tmp, k4);
        const double s = (n == steps) ? spec.T : h * static_cast<double>(n);
        const double limit = growth * s + 1e-12;
        for (int i = 0; i < w; ++i) {
            v[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!(std::abs(v[i]) <= limit)) {
                std::ostringstream os;
                os << "log-ratio scheme blew up at t=" << spec.T - s << ", q=" << i - spec.q_bar
                   << " (|v+|=" << std::abs(v[i]) << " > " << limit << "); reduce dt";
                throw NumericalError(os.str());
            }
        }
        if (n % stride == 0 || n == steps) store(s);
    }

    LogRatioGrid g;
    g.spec = spec;
    const std::size_t m = rows_s.size();
    g.times.resize(m);
    g.v_plus.resize(rows.size());
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t src = m - 1 - r;
        g.times[r] = (src == m - 1) ? 0.0 : spec.T - rows_s[src];
        std::copy_n(rows.begin() + static_cast<std::ptrdiff_t>(src * w), w,
                    g.v_plus.begin() + static_cast<std::ptrdiff_t>(r * w));
    }
    g.times.back() = spec.T;
    return g;
}

}  // namespace mtfee
