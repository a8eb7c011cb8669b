#pragma once

#include "gfad/covariance.hpp"
#include "gfad/mle_direct.hpp"
#include "gfad/types.hpp"

namespace gfad {

struct VirtualState {
    rvec beta;            ///< length N*P, entries in [0,1]
    CovarianceState cov;
    double rho = 0.0;     ///< penalty weight, >= 0 (0 disables the penalty: BL-MLE)
    rvec group_sums;      ///< length N, cached sum of each device's P entries
    int sweep_count = 0;
};

struct VirtualDetectOptions {
    double rho = -1.0;  ///< negative means "use tr(sample_cov)/L"
    int max_sweeps = 20;
    double tol = 1e-4;
    bool track_objective = false;
};

/// Group-mean penalty sum_n a_n*(1 - a_n), a_n the mean of the device's P entries.
double penalty_value(const rvec& beta, int N, int P);

/// Cubic numerator coefficients (ascending: D, C, B, A) of the derivative of the
/// penalized per-coordinate objective.
struct CubicCoefficients {
    double a3, a2, a1, a0;
};
CubicCoefficients cubic_coefficients(double v, double u, double gain, double rho, int P,
                                     double group_sum);

/// Penalized objective change along coordinate i:
///   log(1 + d*g*v) - d*g*u/(1 + d*g*v) + (rho*d/P)*(1 - d/P - 2*group_sum/P).
double delta_penalized_objective(double v, double u, double gain, double rho, int P,
                                 double group_sum, double d);

/// Optimal coordinate increment over [-beta_i, 1-beta_i], ties toward smallest |d|.
double coordinate_step_virtual(double v, double u, double gain, double rho, int P,
                               double group_sum, double beta_i);

/// Coordinate descent over the N*P virtual-device activities. Returns beta.
rvec detect_virtual(const cmat& sample_cov, const PilotSet& pilots, const SystemConfig& config,
                    const VirtualDetectOptions& options = {}, DetectDiagnostics* diag = nullptr);

/// Group means: alpha_n = mean of the P entries of device n.
rvec map_to_alpha(const rvec& beta, int N, int P);

}  // namespace gfad
