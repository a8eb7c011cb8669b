#pragma once

#include "gfad/covariance.hpp"
#include "gfad/polyroot.hpp"
#include "gfad/types.hpp"

namespace gfad {

struct DetectOptions {
    int max_sweeps = 20;
    double tol = 1e-4;  ///< stop when the largest per-sweep coordinate change drops below this
    bool track_objective = false;  ///< record the dense objective after every accepted update
};

struct DetectDiagnostics {
    int sweeps = 0;
    std::vector<double> objective_trace;  ///< only filled when track_objective is set
    cmat final_inverse;                   ///< maintained Sigma^{-1} at termination
};

/// Eigen-data of the per-coordinate subproblem: v = eigenvalues of
/// gain * S_n^H Sigma^{-1} S_n, u = matching diagonal of the congruence of
/// gain * S_n^H Sigma^{-1} SampleCov Sigma^{-1} S_n.
struct SpectralData {
    rvec v;
    rvec u;
};

/// V = gain * block^H * inv * block, T = gain * block^H * inv * sample_cov * inv * block.
std::pair<cmat, cmat> quadratic_forms(const CovarianceState& cov, const cmat& block,
                                      const cmat& sample_cov, double gain);

SpectralData spectral(const cmat& V, const cmat& T);

/// Objective change along coordinate direction:
///   sum_p log(1 + d*v_p) - d * sum_p u_p / (1 + d*v_p).
/// Throws std::runtime_error("infeasible step") at or beyond a pole.
double delta_objective(const SpectralData& sd, double d);

/// Numerator polynomial of d/dd delta_objective, degree <= 2P-1, assembled by
/// coefficient convolution.
RealPolynomial derivative_numerator(const SpectralData& sd);

/// Test-only cross-check: same polynomial assembled from the combinatorial
/// h(z,t) sums instead of convolution.
RealPolynomial derivative_numerator_combinatorial(const SpectralData& sd);

/// Optimal coordinate increment over [-alpha_n, 1-alpha_n]: best of the interior
/// stationary points and the endpoints, ties toward smallest |d|.
double coordinate_step(const SpectralData& sd, double alpha_n);

struct DirectState {
    rvec alpha;
    CovarianceState cov;
    int sweep_count = 0;
};

/// Coordinate-descent activity detection over the N device activities.
rvec detect_direct(const cmat& sample_cov, const PilotSet& pilots, const SystemConfig& config,
                   const DetectOptions& options = {}, DetectDiagnostics* diag = nullptr);

}  // namespace gfad
