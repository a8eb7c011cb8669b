#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gfad/mle_virtual.hpp"
#include "gfad/signal_model.hpp"
#include "test_util.hpp"

using namespace gfad;
using namespace gfad::test;

namespace {

/// Dense penalized objective, rebuilt from scratch (test oracle).
double dense_penalized(const rvec& beta, const PilotSet& pilots, const SystemConfig& cfg,
                       const cmat& sample_cov, double rho) {
    const int N = cfg.num_devices, P = cfg.num_taps;
    std::vector<cmat> columns;
    rvec gains(static_cast<Eigen::Index>(N) * P);
    for (Eigen::Index i = 0; i < gains.size(); ++i) {
        columns.push_back(pilots.stacked.col(i));
        gains[i] = cfg.gains[static_cast<int>(i / P)];
    }
    const std::vector<double> weights(beta.data(), beta.data() + beta.size());
    return model_objective(weights, columns, gains, cfg.noise_var, sample_cov)
         + rho * penalty_value(beta, N, P);
}

struct VirtualCoordinate {
    double v, u, gain, group_sum;
};

VirtualCoordinate coordinate_data(const rvec& beta, Eigen::Index i, const PilotSet& pilots,
                                  const SystemConfig& cfg, const cmat& sample_cov) {
    const int P = cfg.num_taps;
    const int n = static_cast<int>(i / P);
    cmat sigma = cfg.noise_var * cmat::Identity(cfg.pilot_length, cfg.pilot_length);
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        sigma += beta[j] * cfg.gains[static_cast<int>(j / P)] * pilots.stacked.col(j)
                 * pilots.stacked.col(j).adjoint();
    const cmat inv = sigma.inverse();
    const cvec s = pilots.stacked.col(i);
    const cvec w = inv * s;
    return {std::real(s.dot(w)), std::real(w.dot(sample_cov * w)), cfg.gains[n],
            beta.segment(static_cast<Eigen::Index>(n) * P, P).sum()};
}

}  // namespace

TEST_CASE("penalty value") {
    CHECK(penalty_value(rvec::Zero(6), 3, 2) == 0.0);

    rvec beta = rvec::Zero(6);
    beta.segment(0, 2).setOnes();  // one full group
    CHECK(penalty_value(beta, 3, 2) == 0.0);

    beta.setZero();
    beta[0] = 1.0;  // group mean 0.5
    CHECK(penalty_value(beta, 3, 2) == doctest::Approx(0.25));

    RandomStream rng(40, 0, StreamPurpose::Channel);
    for (int k = 0; k < 50; ++k) {
        rvec b(8);
        for (int i = 0; i < 8; ++i) b[i] = rng.uniform();
        const double val = penalty_value(b, 2, 4);
        CHECK(val >= 0.0);
        CHECK(val <= 2.0 / 4.0);
    }
}

TEST_CASE("penalty vanishes exactly on constant binary groups") {
    RandomStream rng(41, 0, StreamPurpose::Channel);
    const int N = 4, P = 3;
    for (int k = 0; k < 100; ++k) {
        rvec beta(N * P);
        bool all_binary_constant = true;
        for (int n = 0; n < N; ++n) {
            const int kind = static_cast<int>(rng.uniform() * 3.0);
            for (int p = 0; p < P; ++p) {
                if (kind == 0) beta[n * P + p] = 0.0;
                else if (kind == 1) beta[n * P + p] = 1.0;
                else beta[n * P + p] = rng.uniform();
            }
            if (kind == 2) all_binary_constant = false;
        }
        const double val = penalty_value(beta, N, P);
        if (all_binary_constant) CHECK(val == 0.0);
        else CHECK(val > 0.0);
    }
}

TEST_CASE("cubic coefficients") {
    SUBCASE("rho = 0 reduces to the flat-fading root") {
        const double v = 1.3, u = 2.9, g = 0.8;
        const CubicCoefficients c = cubic_coefficients(v, u, g, 0.0, 3, 1.0);
        CHECK(c.a3 == 0.0);
        CHECK(c.a2 == 0.0);
        CHECK(c.a1 == doctest::Approx(g * g * v * v).epsilon(1e-14));
        CHECK(c.a0 == doctest::Approx(g * (v - u)).epsilon(1e-14));
        CHECK(-c.a0 / c.a1 == doctest::Approx((u - v) / (g * v * v)).epsilon(1e-12));
    }

    SUBCASE("zero gain keeps only penalty terms") {
        const double rho = 2.0;
        const int P = 4;
        const double group_sum = 1.5;
        const CubicCoefficients c = cubic_coefficients(1.0, 1.0, 0.0, rho, P, group_sum);
        CHECK(c.a3 == 0.0);
        CHECK(c.a2 == 0.0);
        CHECK(c.a1 == doctest::Approx(-2.0 * rho / (P * P)).epsilon(1e-14));
        CHECK(c.a0 == doctest::Approx((rho / P) * (1.0 - 2.0 * group_sum / P)).epsilon(1e-14));
    }

    SUBCASE("cubic is the numerator of the derivative") {
        RandomStream rng(42, 0, StreamPurpose::Channel);
        for (int k = 0; k < 20; ++k) {
            const double v = 0.2 + 2.0 * rng.uniform();
            const double u = 3.0 * rng.uniform();
            const double g = 0.3 + rng.uniform();
            const double rho = 2.0 * rng.uniform();
            const int P = 2 + k % 3;
            const double group_sum = rng.uniform() * P;
            const CubicCoefficients c = cubic_coefficients(v, u, g, rho, P, group_sum);
            for (int j = 0; j < 20; ++j) {
                const double d = -0.8 / (g * v) + rng.uniform() * (1.0 + 0.8 / (g * v));
                const double h = 1e-6;
                const double fd = (delta_penalized_objective(v, u, g, rho, P, group_sum, d + h)
                                   - delta_penalized_objective(v, u, g, rho, P, group_sum, d - h))
                                  / (2 * h);
                const double denom = (1 + d * g * v) * (1 + d * g * v);
                const double cubic = ((c.a3 * d + c.a2) * d + c.a1) * d + c.a0;
                CHECK(std::abs(cubic / denom - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
            }
        }
    }
}

TEST_CASE("delta penalized objective") {
    CHECK(delta_penalized_objective(1.2, 0.5, 1.0, 3.0, 2, 0.7, 0.0) == 0.0);
    // rho = 0, g*v = 1, u such that g*u = 1, d = 1
    CHECK(delta_penalized_objective(1.0, 1.0, 1.0, 0.0, 2, 0.0, 1.0)
          == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-12));
    CHECK_THROWS_WITH_AS(delta_penalized_objective(2.0, 1.0, 1.0, 0.0, 2, 0.0, -0.5),
                         "infeasible step", std::runtime_error);
}

TEST_CASE("delta penalized objective matches a dense rebuild") {
    const SystemConfig cfg = small_config(3, 4, 12, 2, 0.2, 0.5);
    const PilotSet pilots = generate_pilots(cfg, 43);
    const Scene scene = generate_scene(cfg, 43);
    const cmat sample_cov =
        sample_covariance(received_effective(scene, pilots, cfg, generate_noise(cfg, 43)));
    const double rho = 1.7;

    rvec beta(6);
    beta << 0.2, 0.9, 0.0, 0.4, 1.0, 0.3;
    const double f0 = dense_penalized(beta, pilots, cfg, sample_cov, rho);
    for (Eigen::Index i = 0; i < 6; ++i) {
        const VirtualCoordinate cd = coordinate_data(beta, i, pilots, cfg, sample_cov);
        for (double frac : {0.2, 0.6, 1.0}) {
            const double d = -beta[i] + frac;
            rvec moved = beta;
            moved[i] += d;
            const double f1 = dense_penalized(moved, pilots, cfg, sample_cov, rho);
            CHECK(delta_penalized_objective(cd.v, cd.u, cd.gain, rho, cfg.num_taps, cd.group_sum, d)
                  == doctest::Approx(f1 - f0).epsilon(1e-8));
        }
    }
}

TEST_CASE("virtual coordinate step closed forms at rho = 0") {
    const double g = 1.0;
    double v = 0.8, u = 2.0;
    CHECK(coordinate_step_virtual(v, u, g, 0.0, 2, 0.0, 0.0)
          == doctest::Approx(std::min((u - v) / (g * v * v), 1.0)).epsilon(1e-12));
    u = 0.5;
    CHECK(coordinate_step_virtual(v, u, g, 0.0, 2, 0.0, 0.0) == 0.0);
}

TEST_CASE("virtual coordinate step beats a dense grid") {
    RandomStream rng(44, 0, StreamPurpose::Channel);
    for (int k = 0; k < 100; ++k) {
        const double v = 0.2 + 2.0 * rng.uniform();
        const double u = 3.0 * rng.uniform();
        const double g = 0.3 + rng.uniform();
        const double rho = (k % 3 == 0) ? 0.0 : (k % 3 == 1 ? 1.0 : 10.0);
        const int P = 2 + k % 3;
        const double group_sum = rng.uniform() * P;
        const double beta_i = rng.uniform() * std::min(1.0, 0.9 / (g * v));
        const double d_star = coordinate_step_virtual(v, u, g, rho, P, group_sum, beta_i);
        CHECK(d_star >= -beta_i);
        CHECK(d_star <= 1.0 - beta_i);
        double grid_best = 1e300;
        for (int i = 0; i <= 100000; ++i) {
            const double d = -beta_i + i * 1e-5;
            grid_best = std::min(grid_best,
                                 delta_penalized_objective(v, u, g, rho, P, group_sum, d));
        }
        CHECK(delta_penalized_objective(v, u, g, rho, P, group_sum, d_star) <= grid_best + 1e-7);
    }
}

TEST_CASE("virtual and actual covariances coincide on constant groups") {
    const SystemConfig cfg = small_config(4, 4, 16, 3, 0.1, 0.5);
    const PilotSet pilots = generate_pilots(cfg, 45);
    rvec alpha(4);
    alpha << 0.3, 0.0, 1.0, 0.6;

    cmat sigma1 = cfg.noise_var * cmat::Identity(16, 16);
    for (int n = 0; n < 4; ++n)
        sigma1 += alpha[n] * cfg.gains[n] * pilots.blocks[static_cast<std::size_t>(n)]
                  * pilots.blocks[static_cast<std::size_t>(n)].adjoint();

    cmat sigma2 = cfg.noise_var * cmat::Identity(16, 16);
    for (Eigen::Index i = 0; i < 12; ++i) {
        const int n = static_cast<int>(i / 3);
        sigma2 += alpha[n] * cfg.gains[n] * pilots.stacked.col(i) * pilots.stacked.col(i).adjoint();
    }
    CHECK((sigma1 - sigma2).norm() <= 1e-12 * sigma1.norm());
}

TEST_CASE("detect on pure-noise statistics stays at zero") {
    const SystemConfig cfg = small_config(6, 4, 16, 2, 0.1, 0.5);
    const PilotSet pilots = generate_pilots(cfg, 46);
    const cmat sample_cov = cfg.noise_var * cmat::Identity(16, 16);
    VirtualDetectOptions opts;
    opts.rho = 0.0;
    CHECK(detect_virtual(sample_cov, pilots, cfg, opts).norm() == 0.0);
    opts.rho = 1.0;
    CHECK(detect_virtual(sample_cov, pilots, cfg, opts).norm() == 0.0);
}

TEST_CASE("rho = 0 equals a flat-fading reference over the virtual devices") {
    const SystemConfig cfg = small_config(6, 16, 16, 2, 0.1, 0.4);
    const PilotSet pilots = generate_pilots(cfg, 47);
    const Scene scene = generate_scene(cfg, 47);
    const cmat sample_cov =
        sample_covariance(received_effective(scene, pilots, cfg, generate_noise(cfg, 47)));

    VirtualDetectOptions opts;
    opts.rho = 0.0;
    const rvec got = detect_virtual(sample_cov, pilots, cfg, opts);

    // independent reference: closed-form flat-fading coordinate descent on columns
    const Eigen::Index total = 12;
    rvec beta = rvec::Zero(total);
    cmat inv = cmat::Identity(16, 16) / cfg.noise_var;
    for (int sweep = 0; sweep < 20; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index i = 0; i < total; ++i) {
            const double g = cfg.gains[static_cast<int>(i / 2)];
            const cvec s = pilots.stacked.col(i);
            const cvec w = inv * s;
            const double v = g * std::real(s.dot(w));
            const double u = g * std::real(w.dot(sample_cov * w));
            const double d = std::clamp((u - v) / (v * v), -beta[i], 1.0 - beta[i]);
            if (d == 0.0) continue;
            beta[i] += d;
            inv -= (d * g / (1.0 + d * g * std::real(s.dot(inv * s)))) * ((inv * s) * (inv * s).adjoint());
            max_change = std::max(max_change, std::abs(d));
        }
        inv = 0.5 * (inv + cmat(inv.adjoint()));
        if (max_change < 1e-4) break;
    }
    CHECK((got - beta).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("large rho pushes group means toward binary values") {
    const SystemConfig cfg = small_config(50, 128, 32, 2, 0.1, 0.1);
    const PilotSet pilots = generate_pilots(cfg, 48);
    const Scene scene = generate_scene(cfg, 48);
    const cmat sample_cov =
        sample_covariance(received_effective(scene, pilots, cfg, generate_noise(cfg, 48)));

    VirtualDetectOptions opts;
    opts.rho = 1e3 * sample_cov.trace().real() / 32.0;
    const rvec beta = detect_virtual(sample_cov, pilots, cfg, opts);
    const rvec alpha = map_to_alpha(beta, 50, 2);
    for (int n = 0; n < 50; ++n)
        CHECK(std::min(alpha[n], 1.0 - alpha[n]) <= 0.05);
}

TEST_CASE("penalized objective never increases across accepted updates") {
    const SystemConfig cfg = small_config(6, 8, 16, 2, 0.1, 0.4);
    const PilotSet pilots = generate_pilots(cfg, 49);
    const Scene scene = generate_scene(cfg, 49);
    const cmat sample_cov =
        sample_covariance(received_effective(scene, pilots, cfg, generate_noise(cfg, 49)));
    VirtualDetectOptions opts;
    opts.rho = 0.5;
    opts.track_objective = true;
    DetectDiagnostics diag;
    detect_virtual(sample_cov, pilots, cfg, opts, &diag);
    REQUIRE(!diag.objective_trace.empty());
    for (std::size_t k = 1; k < diag.objective_trace.size(); ++k)
        CHECK(diag.objective_trace[k] <= diag.objective_trace[k - 1] + 1e-9);
}

TEST_CASE("map_to_alpha") {
    CHECK(map_to_alpha(rvec::Zero(8), 2, 4).norm() == 0.0);
    CHECK(map_to_alpha(rvec::Ones(8), 2, 4).isOnes());
    rvec beta = rvec::Zero(4);
    beta << 1.0, 0.0, 0.0, 1.0;
    CHECK(map_to_alpha(beta, 1, 4)[0] == doctest::Approx(0.5));
    CHECK_THROWS_AS(map_to_alpha(rvec::Zero(5), 2, 4), std::invalid_argument);
}
