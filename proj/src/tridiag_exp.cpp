#include "mtfee/tridiag_exp.hpp"

#include "mtfee/errors.hpp"

#include <lapacke.h>

#include <cmath>
#include <string>

namespace mtfee {

SymTridiagExp::SymTridiagExp(std::vector<double> diagonal, double off_diagonal)
    : n_(static_cast<int>(diagonal.size())) {
    if (n_ < 1) throw ValidationError("tridiagonal matrix must be non-empty");
    std::vector<double> d = std::move(diagonal);
    std::vector<double> e(static_cast<std::size_t>(n_), off_diagonal);
    lambda_.assign(static_cast<std::size_t>(n_), 0.0);
    vecs_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n_));
    lapack_int found = 0;
    lapack_logical tryrac = 1;
    // MRRR keeps small eigenvector components accurate relative to their size,
    // which the log-domain tails at large |q| depend on.
    const lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'A', n_, d.data(), e.data(), 0.0, 0.0, 0, 0,
                                           &found, lambda_.data(), vecs_.data(), n_, n_, support.data(), &tryrac);
    if (info != 0 || found != n_)
        throw NumericalError("tridiagonal eigendecomposition failed (dstemr info=" + std::to_string(info) + ")");

    weight_.assign(static_cast<std::size_t>(n_), 0.0);
    for (int k = 0; k < n_; ++k) {
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += vecs_[static_cast<std::size_t>(k) * n_ + i];
        weight_[k] = s;
    }
}

void SymTridiagExp::log_apply_ones(double tau, int lo, int hi, double* out) const {
    if (tau == 0.0) {
        for (int i = lo; i <= hi; ++i) out[i - lo] = 0.0;
        return;
    }
    const double top = lambda_.back();
    for (int i = lo; i <= hi; ++i) out[i - lo] = 0.0;
    for (int k = 0; k < n_; ++k) {
        const double scale = std::exp(tau * (lambda_[k] - top)) * weight_[k];
        if (scale == 0.0) continue;
        const double* col = &vecs_[static_cast<std::size_t>(k) * n_];
        for (int i = lo; i <= hi; ++i) out[i - lo] += col[i] * scale;
    }
    for (int i = lo; i <= hi; ++i) {
        if (!(out[i - lo] > 0.0))
            throw NumericalError("matrix exponential lost positivity at component " + std::to_string(i));
        out[i - lo] = tau * top + std::log(out[i - lo]);
    }
}

double SymTridiagExp::log_apply_ones(double tau, int i) const {
    double out;
    log_apply_ones(tau, i, i, &out);
    return out;
}

std::vector<double> SymTridiagExp::log_apply_ones(double tau) const {
    std::vector<double> out(static_cast<std::size_t>(n_));
    log_apply_ones(tau, 0, n_ - 1, out.data());
    return out;
}

}  // namespace mtfee
