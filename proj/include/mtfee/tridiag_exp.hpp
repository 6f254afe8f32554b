#pragma once

#include <vector>

namespace mtfee {

/// Exponential of a symmetric tridiagonal matrix B (constant off-diagonal)
/// applied to the all-ones vector, in log form.
///
/// B = V diag(λ) Vᵀ is factorised once; e^{τB}1 = V diag(e^{τλ}) Vᵀ1 can then be
/// evaluated at any τ ≥ 0 exactly, without re-factoring or interpolating.
class SymTridiagExp {
public:
    /// Throws NumericalError if the eigensolver fails.
    SymTridiagExp(std::vector<double> diagonal, double off_diagonal);

    int size() const noexcept { return n_; }
    double max_eigenvalue() const noexcept { return lambda_.back(); }
    const std::vector<double>& eigenvalues() const noexcept { return lambda_; }

    /// log (e^{τB}1)_i. Returns exactly 0 at τ = 0.
    double log_apply_ones(double tau, int i) const;
    /// All components at once.
    std::vector<double> log_apply_ones(double tau) const;
    /// Components lo..hi inclusive into out[0..hi-lo]; avoids allocation in hot loops.
    void log_apply_ones(double tau, int lo, int hi, double* out) const;

private:
    int n_;
    std::vector<double> lambda_;  // ascending
    std::vector<double> vecs_;    // column-major n × n
    std::vector<double> weight_;  // Vᵀ1
};

}  // namespace mtfee
