#pragma once

#include "gfad/types.hpp"

namespace gfad {

/// Running inverse of the model covariance Sigma. Owned by one detector run;
/// updated in place by low-rank corrections.
struct CovarianceState {
    cmat inv;          ///< current Sigma^{-1}, L x L Hermitian
    double noise_var;  ///< sigma^2
};

/// Sigma = sigma^2 * I, so inv = I / sigma^2.
CovarianceState make_initial_covariance(int L, double noise_var);

/// Woodbury update: inv <- (Sigma + c * block * block^H)^{-1}, cost O(P*L^2).
/// Throws std::runtime_error("covariance update singular") if the inner P x P
/// system cannot be solved.
void rank_p_update(CovarianceState& state, const cmat& block, double c);

/// Sherman-Morrison special case, block = single column.
void rank_one_update(CovarianceState& state, const cvec& s, double c);

/// (A + A^H)/2, applied once per coordinate sweep to bound drift.
void rehermitize(CovarianceState& state);

/// Dense negative log-likelihood f = log|Sigma| + tr(Sigma^{-1} * sample_cov)
/// with Sigma = noise_var*I + sum_k weights[k]*gains[k]*atoms[k]*atoms[k]^H.
/// Cholesky based; throws std::runtime_error("covariance not positive definite").
double model_objective(const std::vector<double>& weights, const std::vector<cmat>& atoms,
                       const rvec& gains, double noise_var, const cmat& sample_cov);

}  // namespace gfad
