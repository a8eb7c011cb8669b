#include "gfad/polyroot.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gfad {

RealPolynomial::RealPolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
    double max_abs = 0.0;
    for (double c : coeffs_) max_abs = std::max(max_abs, std::abs(c));
    const double tol = 1e-14 * max_abs;
    while (coeffs_.size() > 1 && std::abs(coeffs_.back()) <= tol) coeffs_.pop_back();
}

double RealPolynomial::evaluate(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

RealPolynomial RealPolynomial::derivative() const {
    if (coeffs_.size() == 1) return RealPolynomial({0.0});
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k)
        d[k - 1] = static_cast<double>(k) * coeffs_[k];
    return RealPolynomial(std::move(d));
}

RealPolynomial multiply(const RealPolynomial& p, const RealPolynomial& q) {
    std::vector<double> out(static_cast<std::size_t>(p.degree() + q.degree()) + 1, 0.0);
    for (int i = 0; i <= p.degree(); ++i)
        for (int j = 0; j <= q.degree(); ++j) out[static_cast<std::size_t>(i + j)] += p[i] * q[j];
    return RealPolynomial(std::move(out));
}

RealPolynomial add(const RealPolynomial& p, const RealPolynomial& q) {
    std::vector<double> out(static_cast<std::size_t>(std::max(p.degree(), q.degree())) + 1, 0.0);
    for (int i = 0; i <= p.degree(); ++i) out[static_cast<std::size_t>(i)] += p[i];
    for (int i = 0; i <= q.degree(); ++i) out[static_cast<std::size_t>(i)] += q[i];
    return RealPolynomial(std::move(out));
}

namespace {

void cubic_real_roots(double a, double b, double c, double d, std::vector<double>& out) {
    // a*x^3 + b*x^2 + c*x + d, a != 0; depressed form t^3 + p*t + q with x = t - b/(3a)
    const double shift = b / (3.0 * a);
    const double p = c / a - shift * shift * 3.0;
    const double q = 2.0 * shift * shift * shift - shift * c / a + d / a;
    const double tiny = 1e-300;
    if (std::abs(p) < 1e-14 * (1.0 + std::abs(q))) {
        out.push_back(std::cbrt(-q) - shift);
        return;
    }
    const double disc = -(4.0 * p * p * p + 27.0 * q * q);
    if (disc > 0.0) {
        // three distinct real roots, trigonometric form
        const double m = 2.0 * std::sqrt(-p / 3.0);
        double arg = 3.0 * q / (p * m);
        arg = std::clamp(arg, -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k)
            out.push_back(m * std::cos(theta - 2.0 * M_PI * k / 3.0) - shift);
    } else {
        // one real root (plus possibly a double root at disc == 0), Cardano
        const double s = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
        const double u = std::cbrt(-q / 2.0 + (q >= 0.0 ? -s : s));
        const double v = (std::abs(u) > tiny) ? -p / (3.0 * u) : 0.0;
        out.push_back(u + v - shift);
        if (disc > -1e-12 * (std::abs(p * p * p) + q * q)) out.push_back(-(u + v) / 2.0 - shift);
    }
}

void companion_real_roots(const RealPolynomial& poly, std::vector<double>& out) {
    const int n = poly.degree();
    const double lead = poly[n];
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -poly[i] / lead;
    // iterative 2-power balancing (Parlett-Reinsch style)
    for (int pass = 0; pass < 20; ++pass) {
        bool converged = true;
        for (int i = 0; i < n; ++i) {
            double cn = 0.0, rn = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                cn += std::abs(comp(j, i));
                rn += std::abs(comp(i, j));
            }
            if (cn == 0.0 || rn == 0.0) continue;
            double f = 1.0;
            double c_scaled = cn;
            while (c_scaled < rn / 2.0) { f *= 2.0; c_scaled *= 2.0; }
            while (c_scaled >= rn * 2.0) { f /= 2.0; c_scaled /= 2.0; }
            if (f != 1.0 && cn * f + rn / f < 0.95 * (cn + rn)) {
                converged = false;
                comp.col(i) *= f;
                comp.row(i) /= f;
            }
        }
        if (converged) break;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(comp, false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("real_roots_in_interval: eigensolver failed");
    const RealPolynomial deriv = poly.derivative();
    for (int i = 0; i < n; ++i) {
        const std::complex<double> ev = solver.eigenvalues()[i];
        if (std::abs(ev.imag()) > 1e-9 * (1.0 + std::abs(ev.real()))) continue;
        double r = ev.real();
        const double dp = deriv.evaluate(r);
        if (dp != 0.0) {  // one Newton polish step
            const double step = poly.evaluate(r) / dp;
            if (std::isfinite(step) && std::abs(step) < 1.0) r -= step;
        }
        out.push_back(r);
    }
}

}  // namespace

std::vector<double> real_roots_in_interval(const RealPolynomial& p, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("real_roots_in_interval: lo > hi");
    if (p.degree() == 0) throw std::invalid_argument("real_roots_in_interval: constant polynomial");

    std::vector<double> candidates;
    switch (p.degree()) {
        case 1:
            candidates.push_back(-p[0] / p[1]);
            break;
        case 2: {
            const double a = p[2], b = p[1], c = p[0];
            const double disc = b * b - 4.0 * a * c;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
                candidates.push_back(q / a);
                if (q != 0.0) candidates.push_back(c / q);
                else candidates.push_back(0.0);
            }
            break;
        }
        case 3:
            cubic_real_roots(p[3], p[2], p[1], p[0], candidates);
            break;
        default:
            companion_real_roots(p, candidates);
            break;
    }

    std::vector<double> roots;
    const double clamp_tol = 1e-12 * std::max({std::abs(lo), std::abs(hi), 1.0});
    for (double r : candidates) {
        if (!std::isfinite(r)) continue;
        if (r < lo - clamp_tol || r > hi + clamp_tol) continue;
        roots.push_back(std::clamp(r, lo, hi));
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> merged;
    for (double r : roots)
        if (merged.empty() || r - merged.back() > 1e-10) merged.push_back(r);
    return merged;
}

}  // namespace gfad
