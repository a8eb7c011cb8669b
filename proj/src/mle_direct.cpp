#include "gfad/mle_direct.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gfad {

std::pair<cmat, cmat> quadratic_forms(const CovarianceState& cov, const cmat& block,
                                      const cmat& sample_cov, double gain) {
    const cmat w = cov.inv * block;  // L x P
    cmat V = gain * (block.adjoint() * w);
    cmat T = gain * (w.adjoint() * sample_cov * w);
    V = 0.5 * (V + cmat(V.adjoint()));
    T = 0.5 * (T + cmat(T.adjoint()));
    return {std::move(V), std::move(T)};
}

SpectralData spectral(const cmat& V, const cmat& T) {
    Eigen::SelfAdjointEigenSolver<cmat> eig(V);
    if (eig.info() != Eigen::Success) throw std::runtime_error("spectral: eigensolver failed");
    SpectralData sd;
    sd.v = eig.eigenvalues();
    const cmat congruence = eig.eigenvectors().adjoint() * T * eig.eigenvectors();
    sd.u = congruence.diagonal().real();
    return sd;
}

double delta_objective(const SpectralData& sd, double d) {
    double acc = 0.0;
    for (Eigen::Index p = 0; p < sd.v.size(); ++p) {
        const double denom = 1.0 + d * sd.v[p];
        if (!(denom > 0.0)) throw std::runtime_error("infeasible step");
        acc += std::log(denom) - d * sd.u[p] / denom;
    }
    return acc;
}

RealPolynomial derivative_numerator(const SpectralData& sd) {
    // sum_p [v_p*(1 + d*v_p) - u_p] * prod_{q != p} (1 + d*v_q)^2
    const int P = static_cast<int>(sd.v.size());
    RealPolynomial total({0.0});
    for (int p = 0; p < P; ++p) {
        RealPolynomial term({sd.v[p] - sd.u[p], sd.v[p] * sd.v[p]});
        for (int q = 0; q < P; ++q) {
            if (q == p) continue;
            const RealPolynomial factor({1.0, sd.v[q]});
            term = multiply(term, multiply(factor, factor));
        }
        total = add(total, term);
    }
    return total;
}

namespace {

// h(z, t): sum over binary patterns (x, y) with x_q + y_q <= 1 and
// sum_q (x_q + 2*y_q) == t of prod_q 2^{x_q} * z_q^{x_q + 2*y_q}. Each factor q
// contributes exponent 0, 1 (weight 2*z_q), or 2 (weight z_q^2).
double h_sum_rec(const std::vector<double>& z, std::size_t q, int remaining) {
    if (q == z.size()) return remaining == 0 ? 1.0 : 0.0;
    double acc = h_sum_rec(z, q + 1, remaining);
    if (remaining >= 1) acc += 2.0 * z[q] * h_sum_rec(z, q + 1, remaining - 1);
    if (remaining >= 2) acc += z[q] * z[q] * h_sum_rec(z, q + 1, remaining - 2);
    return acc;
}

double h_sum(const std::vector<double>& z, int t) { return h_sum_rec(z, 0, t); }

}  // namespace

RealPolynomial derivative_numerator_combinatorial(const SpectralData& sd) {
    const int P = static_cast<int>(sd.v.size());
    std::vector<double> coeffs(static_cast<std::size_t>(2 * P), 0.0);
    for (int p = 0; p < P; ++p) {
        std::vector<double> z;
        for (int q = 0; q < P; ++q)
            if (q != p) z.push_back(sd.v[q]);
        const double vp = sd.v[p], up = sd.u[p];
        // [(v_p - u_p) + d*v_p^2] * sum_t d^t h(v_{-p}, t); top term lands at 2P-1
        for (int t = 0; t <= 2 * P - 2; ++t) {
            const double ht = h_sum(z, t);
            coeffs[static_cast<std::size_t>(t)] += (vp - up) * ht;
            coeffs[static_cast<std::size_t>(t + 1)] += vp * vp * ht;
        }
    }
    return RealPolynomial(std::move(coeffs));
}

double coordinate_step(const SpectralData& sd, double alpha_n) {
    const double lo = -alpha_n;
    const double hi = 1.0 - alpha_n;
    if (sd.v.size() == 0 || sd.v.cwiseAbs().maxCoeff() == 0.0) return 0.0;

    std::vector<double> candidates = {0.0, lo, hi};
    const RealPolynomial numerator = derivative_numerator(sd);
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
            f = delta_objective(sd, d);
        } catch (const std::runtime_error&) {
            continue;  // at the feasibility boundary the log can blow up; skip
        }
        if (f < best_f) {
            best_f = f;
            best_d = d;
        }
    }
    return best_d;
}

rvec detect_direct(const cmat& sample_cov, const PilotSet& pilots, const SystemConfig& config,
                   const DetectOptions& options, DetectDiagnostics* diag) {
    config.validate();
    const int N = config.num_devices;
    DirectState state{rvec::Zero(N), make_initial_covariance(config.pilot_length, config.noise_var), 0};
    if (diag) *diag = {};

    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (int n = 0; n < N; ++n) {
            const double gain = config.gains[n];
            if (gain == 0.0) continue;
            auto [V, T] = quadratic_forms(state.cov, pilots.blocks[static_cast<std::size_t>(n)],
                                          sample_cov, gain);
            const SpectralData sd = spectral(V, T);
            const double d = coordinate_step(sd, state.alpha[n]);
            if (d == 0.0) continue;
            state.alpha[n] = std::clamp(state.alpha[n] + d, 0.0, 1.0);
            rank_p_update(state.cov, pilots.blocks[static_cast<std::size_t>(n)], d * gain);
            max_change = std::max(max_change, std::abs(d));
            if (diag && options.track_objective) {
                std::vector<double> weights(state.alpha.data(), state.alpha.data() + N);
                diag->objective_trace.push_back(model_objective(
                    weights, pilots.blocks, config.gains, config.noise_var, sample_cov));
            }
        }
        rehermitize(state.cov);
        ++state.sweep_count;
        if (max_change < options.tol) break;
    }
    if (diag) {
        diag->sweeps = state.sweep_count;
        diag->final_inverse = state.cov.inv;
    }
    return state.alpha;
}

}  // namespace gfad
