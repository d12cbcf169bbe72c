#pragma once

// Exact second-moment algebra for jointly Gaussian signals. A LinearForm is a
// linear combination of a fixed basis of independent unit-variance Gaussian
// primitives; its coefficients are DualScalars, so every variance, covariance
// and LMMSE coefficient comes out with an exact derivative in the sweep
// parameter. Because the basis is independent and unit-variance,
//   Var(x)   = sum_i c_i^2
//   Cov(x,y) = sum_i x_i * y_i
// with no sampling anywhere.

#include <cstddef>
#include <vector>

#include "dual.hpp"

namespace migrad {

class LinearForm {
public:
    LinearForm() = default;
    explicit LinearForm(std::size_t basis_size)
        : coeffs_(basis_size) {}

    // Unit coefficient on one basis element, zero elsewhere.
    static LinearForm basis(std::size_t basis_size, std::size_t index) {
        LinearForm f(basis_size);
        f.coeffs_.at(index) = DualScalar::constant(1.0);
        return f;
    }

    std::size_t size() const { return coeffs_.size(); }
    DualScalar& operator[](std::size_t i) { return coeffs_[i]; }
    const DualScalar& operator[](std::size_t i) const { return coeffs_[i]; }

    LinearForm operator+(const LinearForm& o) const {
        check_same_basis(o);
        LinearForm r(size());
        for (std::size_t i = 0; i < size(); ++i)
            r.coeffs_[i] = coeffs_[i] + o.coeffs_[i];
        return r;
    }

    LinearForm operator-(const LinearForm& o) const {
        check_same_basis(o);
        LinearForm r(size());
        for (std::size_t i = 0; i < size(); ++i)
            r.coeffs_[i] = coeffs_[i] - o.coeffs_[i];
        return r;
    }

    LinearForm operator-() const {
        LinearForm r(size());
        for (std::size_t i = 0; i < size(); ++i)
            r.coeffs_[i] = -coeffs_[i];
        return r;
    }

    LinearForm scaled_by(const DualScalar& a) const {
        LinearForm r(size());
        for (std::size_t i = 0; i < size(); ++i)
            r.coeffs_[i] = a * coeffs_[i];
        return r;
    }

private:
    void check_same_basis(const LinearForm& o) const {
        if (size() != o.size())
            throw domain_error("LinearForm basis length mismatch");
    }

    std::vector<DualScalar> coeffs_;
};

inline DualScalar covariance(const LinearForm& x, const LinearForm& y) {
    if (x.size() != y.size())
        throw domain_error("covariance: basis length mismatch");
    DualScalar acc;
    for (std::size_t i = 0; i < x.size(); ++i)
        acc += x[i] * y[i];
    return acc;
}

inline DualScalar variance(const LinearForm& x) {
    return covariance(x, x);
}

struct LmmseResult {
    DualScalar coefficient;  // Cov(x,y) / Var(y)
    LinearForm residual;     // x - coefficient * y, orthogonal to y
};

// Best linear estimate of x from y; for jointly Gaussian signals this is the
// conditional expectation E{x|y} = coefficient * y.
inline LmmseResult lmmse_estimate(const LinearForm& x, const LinearForm& y) {
    DualScalar vy = variance(y);
    if (vy.value <= 0.0)
        throw domain_error("lmmse_estimate: degenerate observation (zero variance)");
    DualScalar k = covariance(x, y) / vy;
    return {k, x - y.scaled_by(k)};
}

} // namespace migrad
