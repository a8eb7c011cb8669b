#include "gfad/covariance.hpp"

#include <cmath>
#include <stdexcept>

namespace gfad {

CovarianceState make_initial_covariance(int L, double noise_var) {
    if (!(noise_var > 0.0)) throw std::invalid_argument("make_initial_covariance: noise_var <= 0");
    return {cmat::Identity(L, L) / noise_var, noise_var};
}

void rank_p_update(CovarianceState& state, const cmat& block, double c) {
    if (c == 0.0) return;
    if (block.rows() != state.inv.rows())
        throw std::invalid_argument("rank_p_update: block row count != L");
    const int P = static_cast<int>(block.cols());
    const cmat w = state.inv * block;                       // L x P
    cmat inner = cmat::Identity(P, P) + c * (block.adjoint() * w);
    inner = 0.5 * (inner + cmat(inner.adjoint()));
    Eigen::LLT<cmat> llt(inner);
    cmat solved;  // inner^{-1} * w^H
    if (llt.info() == Eigen::Success) {
        solved = llt.solve(w.adjoint());
    } else {
        Eigen::PartialPivLU<cmat> lu(inner);
        solved = lu.solve(w.adjoint());
        if (!solved.allFinite() || (inner * solved - w.adjoint()).norm() > 1e-6 * w.norm())
            throw std::runtime_error("covariance update singular");
    }
    state.inv.noalias() -= c * (w * solved);
}

void rank_one_update(CovarianceState& state, const cvec& s, double c) {
    if (c == 0.0) return;
    const cvec w = state.inv * s;
    const double denom = 1.0 + c * std::real(s.dot(w));
    if (!(std::abs(denom) > 1e-300)) throw std::runtime_error("covariance update singular");
    state.inv.noalias() -= (c / denom) * (w * w.adjoint());
}

void rehermitize(CovarianceState& state) {
    state.inv = 0.5 * (state.inv + cmat(state.inv.adjoint()));
}

double model_objective(const std::vector<double>& weights, const std::vector<cmat>& atoms,
                       const rvec& gains, double noise_var, const cmat& sample_cov) {
    if (weights.size() != atoms.size() || static_cast<Eigen::Index>(weights.size()) != gains.size())
        throw std::invalid_argument("model_objective: weights/atoms/gains size mismatch");
    const Eigen::Index L = sample_cov.rows();
    cmat sigma = noise_var * cmat::Identity(L, L);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
        const double w = weights[k] * gains[static_cast<Eigen::Index>(k)];
        if (w != 0.0) sigma.noalias() += w * (atoms[k] * atoms[k].adjoint());
    }
    Eigen::LLT<cmat> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("covariance not positive definite");
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < L; ++i)
        logdet += 2.0 * std::log(std::real(llt.matrixL()(i, i)));
    const double trace_term = llt.solve(sample_cov).trace().real();
    return logdet + trace_term;
}

}  // namespace gfad
