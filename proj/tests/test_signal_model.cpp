#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gfad/signal_model.hpp"
#include "test_util.hpp"

#include <cstdio>
#include <filesystem>

using namespace gfad;
using namespace gfad::test;

TEST_CASE("dft_matrix small cases and unitarity") {
    CHECK(dft_matrix(1)(0, 0) == cplx(1.0, 0.0));

    const cmat f2 = dft_matrix(2);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(f2(0, 0) - cplx(s, 0)) < 1e-15);
    CHECK(std::abs(f2(0, 1) - cplx(s, 0)) < 1e-15);
    CHECK(std::abs(f2(1, 0) - cplx(s, 0)) < 1e-15);
    CHECK(std::abs(f2(1, 1) - cplx(-s, 0)) < 1e-15);

    for (int L : {3, 8, 17, 64}) {
        const cmat f = dft_matrix(L);
        CHECK((f * f.adjoint() - cmat::Identity(L, L)).norm() <= 1e-12 * L);
    }
}

TEST_CASE("generate_pilots determinism and normalization") {
    const SystemConfig cfg = small_config();
    const PilotSet a = generate_pilots(cfg, 42);
    const PilotSet b = generate_pilots(cfg, 42);
    CHECK(a.freq == b.freq);

    const double root_l = std::sqrt(static_cast<double>(cfg.pilot_length));
    for (int n = 0; n < cfg.num_devices; ++n)
        CHECK(std::abs(a.freq.col(n).norm() - root_l) <= 1e-12 * root_l);

    const PilotSet c = generate_pilots(cfg, 43);
    CHECK(a.freq != c.freq);
}

TEST_CASE("all-ones pilot gives identity effective block") {
    const int L = 8, P = 3;
    const PilotSet ps = make_pilot_set(cmat::Ones(L, 1), P);
    CHECK((ps.blocks[0] - cmat::Identity(L, L).leftCols(P)).norm() < 1e-12);
    CHECK(ps.stacked == ps.blocks[0]);
}

TEST_CASE("pilot blocks match their defining product") {
    const SystemConfig cfg = small_config();
    const PilotSet ps = generate_pilots(cfg, 7);
    const cmat f = dft_matrix(cfg.pilot_length);
    for (int n = 0; n < cfg.num_devices; ++n) {
        const cmat full = f.adjoint() * ps.freq.col(n).asDiagonal() * f;
        CHECK((ps.blocks[static_cast<std::size_t>(n)] - full.leftCols(cfg.num_taps)).norm()
              < 1e-12 * full.norm());
    }
}

TEST_CASE("circulant structure") {
    cvec e1 = cvec::Zero(3);
    e1[0] = 1.0;
    CHECK((circulant(e1) - cmat::Identity(3, 3)).norm() == 0.0);

    cvec abc(3);
    abc << cplx(1, 0), cplx(2, 0), cplx(3, 0);
    cmat expected(3, 3);
    expected << cplx(1, 0), cplx(3, 0), cplx(2, 0),
                cplx(2, 0), cplx(1, 0), cplx(3, 0),
                cplx(3, 0), cplx(2, 0), cplx(1, 0);
    CHECK((circulant(abc) - expected).norm() == 0.0);
}

TEST_CASE("circulant diagonalized by the DFT") {
    RandomStream rng(5, 0, StreamPurpose::Channel);
    const int L = 8;
    const cmat f = dft_matrix(L);
    for (int k = 0; k < 5; ++k) {
        const cvec c = random_cmat(rng, L, 1);
        const cmat h = circulant(c);
        cmat diag = f * h * f.adjoint();
        diag.diagonal().setZero();
        CHECK(diag.cwiseAbs().maxCoeff() <= 1e-12 * h.norm());
    }
}

TEST_CASE("received signals: empty scene returns the noise") {
    SystemConfig cfg = small_config();
    cfg.activity_prob = 0.0;
    const PilotSet pilots = generate_pilots(cfg, 1);
    const Scene scene = generate_scene(cfg, 1);
    const cmat noise = generate_noise(cfg, 1);
    CHECK(received_direct(scene, pilots, cfg, noise) == noise);
    CHECK(received_effective(scene, pilots, cfg, noise) == noise);
}

TEST_CASE("single active device matches a hand-built dense oracle") {
    SystemConfig cfg = small_config(1, 2, 8, 1, 0.1, 1.0);
    cfg.gains[0] = 2.0;
    const PilotSet pilots = make_pilot_set(cmat::Ones(8, 1), 1);
    Scene scene;
    scene.activities = ivec::Ones(1);
    RandomStream chan_rng(2, 0, StreamPurpose::Channel);
    scene.channel.taps.push_back(random_cmat(chan_rng, 1, 2));
    const cmat noise = cmat::Zero(8, 2);

    const cmat via_op = received_direct(scene, pilots, cfg, noise);
    // oracle: g^(1/2) * H_{n,m} * time_pilot with everything dense
    const cmat f = dft_matrix(8);
    const cvec time_pilot = (f.adjoint() * pilots.freq.col(0)) / std::sqrt(8.0);
    for (int m = 0; m < 2; ++m) {
        cvec first_col = cvec::Zero(8);
        first_col[0] = scene.channel.taps[0](0, m);
        const cvec oracle = std::sqrt(cfg.gains[0]) * (circulant(first_col) * time_pilot);
        CHECK((via_op.col(m) - oracle).norm() <= 1e-12 * std::max(1.0, oracle.norm()));
    }
    // with the all-ones pilot the effective block is I[:, :1], so the received
    // column is g^(1/2) * h * e_1
    const cmat via_eff = received_effective(scene, pilots, cfg, noise);
    for (int m = 0; m < 2; ++m) {
        CHECK(std::abs(via_eff(0, m) - std::sqrt(2.0) * scene.channel.taps[0](0, m)) < 1e-12);
        CHECK(via_eff.col(m).tail(7).norm() < 1e-12);
    }
}

TEST_CASE("direct and effective models agree") {
    int checked = 0;
    for (int L : {8, 16}) {
        for (int P : {1, 2, 4}) {
            for (std::uint64_t t = 0; t < 9; ++t) {
                const SystemConfig cfg = small_config(5, 3, L, P);
                const PilotSet pilots = generate_pilots(cfg, 100 + t, t);
                const Scene scene = generate_scene(cfg, 100 + t, t);
                const cmat noise = generate_noise(cfg, 100 + t, t);
                const cmat a = received_direct(scene, pilots, cfg, noise);
                const cmat b = received_effective(scene, pilots, cfg, noise);
                CHECK((a - b).norm() <= 1e-9 * b.norm());
                ++checked;
            }
        }
    }
    CHECK(checked == 54);
}

TEST_CASE("noiseless single device stays in the pilot block column space") {
    SystemConfig cfg = small_config(4, 3, 16, 4, 0.1, 0.0);
    const PilotSet pilots = generate_pilots(cfg, 9);
    Scene scene = generate_scene(cfg, 9);
    scene.activities.setZero();
    scene.activities[2] = 1;
    const cmat r = received_effective(scene, pilots, cfg, cmat::Zero(16, 3));
    // projection residual onto span(S_2)
    const cmat s = pilots.blocks[2];
    const cmat proj = s * (s.adjoint() * s).inverse() * s.adjoint();
    CHECK((r - proj * r).norm() <= 1e-9 * r.norm());
}

TEST_CASE("sample covariance basics") {
    CHECK(sample_covariance(cmat::Zero(4, 3)).norm() == 0.0);

    RandomStream rng(3, 0, StreamPurpose::Noise);
    const cvec r = random_cmat(rng, 5, 1);
    const cmat outer = r * r.adjoint();
    CHECK((sample_covariance(r) - outer).norm() <= 1e-14 * outer.norm());
}

TEST_CASE("sample covariance is Hermitian PSD") {
    RandomStream rng(4, 0, StreamPurpose::Noise);
    const cmat received = random_cmat(rng, 8, 12);
    const cmat cov = sample_covariance(received);
    CHECK((cov - cov.adjoint()).norm() <= 1e-12 * cov.norm());
    Eigen::SelfAdjointEigenSolver<cmat> eig(cov);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * cov.norm());
}

TEST_CASE("sample covariance converges to the model covariance") {
    SystemConfig cfg = small_config(4, 20000, 8, 2, 0.1, 0.5);
    const PilotSet pilots = generate_pilots(cfg, 21);
    Scene scene = generate_scene(cfg, 21);
    const cmat noise = generate_noise(cfg, 21);
    const cmat cov = sample_covariance(received_effective(scene, pilots, cfg, noise));

    cmat model = cfg.noise_var * cmat::Identity(8, 8);
    for (int n = 0; n < cfg.num_devices; ++n)
        if (scene.activities[n])
            model += cfg.gains[n] * pilots.blocks[static_cast<std::size_t>(n)]
                     * pilots.blocks[static_cast<std::size_t>(n)].adjoint();
    CHECK((cov - model).norm() / model.norm() <= 0.05);
}

TEST_CASE("pilot and scene files round-trip") {
    const SystemConfig cfg = small_config();
    const auto dir = std::filesystem::temp_directory_path();
    const std::string ppath = (dir / "gfad_test_pilots.bin").string();
    const std::string spath = (dir / "gfad_test_scene.bin").string();

    const PilotSet pilots = generate_pilots(cfg, 33);
    save_pilots(pilots, ppath);
    const PilotSet loaded = load_pilots(ppath);
    CHECK(loaded.freq == pilots.freq);
    CHECK(loaded.blocks.size() == pilots.blocks.size());
    CHECK((loaded.stacked - pilots.stacked).norm() < 1e-12);

    const Scene scene = generate_scene(cfg, 33);
    save_scene(scene, spath);
    const Scene sloaded = load_scene(spath);
    CHECK(sloaded.activities == scene.activities);
    CHECK(sloaded.seed == scene.seed);
    for (std::size_t n = 0; n < scene.channel.taps.size(); ++n)
        CHECK(sloaded.channel.taps[n] == scene.channel.taps[n]);

    std::filesystem::remove(ppath);
    std::filesystem::remove(spath);
    CHECK_THROWS(load_pilots(ppath));
}

TEST_CASE("dimension mismatch is diagnosed") {
    const SystemConfig cfg = small_config();
    const PilotSet pilots = generate_pilots(cfg, 1);
    const Scene scene = generate_scene(cfg, 1);
    const cmat bad_noise = cmat::Zero(cfg.pilot_length + 1, cfg.num_antennas);
    CHECK_THROWS_WITH_AS(received_direct(scene, pilots, cfg, bad_noise),
                         doctest::Contains("noise"), std::invalid_argument);
}
