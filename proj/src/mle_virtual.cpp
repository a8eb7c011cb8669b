#include "gfad/mle_virtual.hpp"

#include "gfad/polyroot.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gfad {

double penalty_value(const rvec& beta, int N, int P) {
    if (beta.size() != static_cast<Eigen::Index>(N) * P)
        throw std::invalid_argument("penalty_value: beta length != N*P");
    double acc = 0.0;
    for (int n = 0; n < N; ++n) {
        const double mean = beta.segment(static_cast<Eigen::Index>(n) * P, P).mean();
        acc += mean * (1.0 - mean);
    }
    return acc;
}

CubicCoefficients cubic_coefficients(double v, double u, double gain, double rho, int P,
                                     double group_sum) {
    const double gv = gain * v;
    const double pd = static_cast<double>(P);
    const double slack = 1.0 - 2.0 * group_sum / pd;
    CubicCoefficients c;
    c.a3 = -(2.0 * rho / (pd * pd)) * gv * gv;
    c.a2 = (rho / pd) * slack * gv * gv - (4.0 * rho / (pd * pd)) * gv;
    c.a1 = gv * gv + (2.0 * rho / pd) * slack * gv - 2.0 * rho / (pd * pd);
    c.a0 = gain * (v - u) + (rho / pd) * slack;
    return c;
}

double delta_penalized_objective(double v, double u, double gain, double rho, int P,
                                 double group_sum, double d) {
    const double denom = 1.0 + d * gain * v;
    if (!(denom > 0.0)) throw std::runtime_error("infeasible step");
    const double pd = static_cast<double>(P);
    return std::log(denom) - d * gain * u / denom
         + (rho * d / pd) * (1.0 - d / pd - 2.0 * group_sum / pd);
}

double coordinate_step_virtual(double v, double u, double gain, double rho, int P,
                               double group_sum, double beta_i) {
    const double lo = -beta_i;
    const double hi = 1.0 - beta_i;
    if (gain == 0.0 && rho == 0.0) return 0.0;

    const CubicCoefficients c = cubic_coefficients(v, u, gain, rho, P, group_sum);
    std::vector<double> candidates = {0.0, lo, hi};
    RealPolynomial numerator({c.a0, c.a1, c.a2, c.a3});
    if (numerator.degree() >= 1) {
        for (double r : real_roots_in_interval(numerator, lo, hi)) candidates.push_back(r);
    }
    std::sort(candidates.begin(), candidates.end(),
              [](double a, double b) { return std::abs(a) < std::abs(b); });

    double best_d = 0.0;
    double best_f = std::numeric_limits<double>::infinity();
    for (double d : candidates) {
        if (d < lo || d > hi) continue;
        double f;
        try {
            f = delta_penalized_objective(v, u, gain, rho, P, group_sum, d);
        } catch (const std::runtime_error&) {
            continue;
        }
        if (f < best_f) {
            best_f = f;
            best_d = d;
        }
    }
    return best_d;
}

rvec detect_virtual(const cmat& sample_cov, const PilotSet& pilots, const SystemConfig& config,
                    const VirtualDetectOptions& options, DetectDiagnostics* diag) {
    config.validate();
    const int N = config.num_devices;
    const int P = config.num_taps;
    const Eigen::Index total = static_cast<Eigen::Index>(N) * P;
    const double rho = options.rho >= 0.0
                           ? options.rho
                           : sample_cov.trace().real() / static_cast<double>(config.pilot_length);

    VirtualState state{rvec::Zero(total),
                       make_initial_covariance(config.pilot_length, config.noise_var), rho,
                       rvec::Zero(N), 0};
    if (diag) *diag = {};

    // test-only dense objective trace support
    std::vector<cmat> columns;
    rvec col_gains(total);
    if (diag && options.track_objective) {
        columns.reserve(static_cast<std::size_t>(total));
        for (Eigen::Index i = 0; i < total; ++i) {
            columns.push_back(pilots.stacked.col(i));
            col_gains[i] = config.gains[static_cast<int>(i / P)];
        }
    }

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index i = 0; i < total; ++i) {
            const int n = static_cast<int>(i / P);
            const double gain = config.gains[n];
            if (gain == 0.0 && rho == 0.0) continue;
            const cvec s = pilots.stacked.col(i);
            const cvec w = state.cov.inv * s;
            const double v = std::real(s.dot(w));
            const double u = std::real(w.dot(sample_cov * w));
            const double d = coordinate_step_virtual(v, u, gain, rho, P, state.group_sums[n],
                                                     state.beta[i]);
            if (d == 0.0) continue;
            state.beta[i] = std::clamp(state.beta[i] + d, 0.0, 1.0);
            state.group_sums[n] += d;
            if (gain != 0.0) rank_one_update(state.cov, s, d * gain);
            max_change = std::max(max_change, std::abs(d));
            if (diag && options.track_objective) {
                std::vector<double> weights(state.beta.data(), state.beta.data() + total);
                diag->objective_trace.push_back(
                    model_objective(weights, columns, col_gains, config.noise_var, sample_cov)
                    + rho * penalty_value(state.beta, N, P));
            }
        }
        rehermitize(state.cov);
        // refresh cached sums so drift cannot accumulate across many sweeps
        for (int n = 0; n < N; ++n)
            state.group_sums[n] = state.beta.segment(static_cast<Eigen::Index>(n) * P, P).sum();
        ++state.sweep_count;
        if (max_change < options.tol) break;
    }
    if (diag) {
        diag->sweeps = state.sweep_count;
        diag->final_inverse = state.cov.inv;
    }
    return state.beta;
}

rvec map_to_alpha(const rvec& beta, int N, int P) {
    if (beta.size() != static_cast<Eigen::Index>(N) * P)
        throw std::invalid_argument("map_to_alpha: beta length != N*P");
    rvec alpha(N);
    for (int n = 0; n < N; ++n)
        alpha[n] = beta.segment(static_cast<Eigen::Index>(n) * P, P).mean();
    return alpha;
}

}  // namespace gfad
