#pragma once

#include <vector>

namespace gfad {

/// Real polynomial, coefficients in ascending powers. Trailing coefficients below
/// 1e-14 * max|coeff| are trimmed on construction.
class RealPolynomial {
  public:
    RealPolynomial() : coeffs_{0.0} {}
    explicit RealPolynomial(std::vector<double> coeffs);

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    double operator[](int k) const { return coeffs_[static_cast<std::size_t>(k)]; }

    /// Horner evaluation.
    double evaluate(double x) const;
    RealPolynomial derivative() const;

  private:
    std::vector<double> coeffs_;
};

RealPolynomial multiply(const RealPolynomial& p, const RealPolynomial& q);
RealPolynomial add(const RealPolynomial& p, const RealPolynomial& q);

/// All real roots of p in [lo, hi], sorted ascending, duplicates within 1e-10
/// merged. Closed forms up to degree 3; companion-matrix eigenvalues with
/// balancing and one Newton polish step for degree >= 4. Roots within 1e-12
/// outside the interval are clamped to the nearest endpoint.
/// Throws std::invalid_argument for a constant polynomial or lo > hi.
std::vector<double> real_roots_in_interval(const RealPolynomial& p, double lo, double hi);

}  // namespace gfad
