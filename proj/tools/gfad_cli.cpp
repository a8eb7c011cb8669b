// Monte-Carlo harness for the two coordinate-descent activity detectors.
//
// Subcommands:
//   sweep    - error-rate sweep over one system axis, CSV output
//   bench    - detect-call timing benchmark, CSV output
//   trial    - single-trial debug dump
//   selftest - condensed oracle checks

#include "gfad/harness.hpp"
#include "gfad/mle_direct.hpp"
#include "gfad/mle_virtual.hpp"
#include "gfad/rng.hpp"
#include "gfad/signal_model.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

using namespace gfad;

struct CliOptions {
    std::string preset = "desk";
    int N = -1, M = -1, L = -1, P = -1;
    double noise_var = -1.0, activity_prob = -1.0, gain = 1.0;
    std::string axis = "";
    std::vector<double> values;
    int trials = -1;
    std::vector<std::string> schemes;
    std::uint64_t seed = 1;
    std::string rho = "default";
    std::string out_path;
    int threads = 0;
};

ExperimentSpec build_spec(const CliOptions& cli) {
    ExperimentSpec spec;
    if (cli.preset == "desk") {
        spec.base.num_devices = 100;
        spec.base.pilot_length = 32;
        spec.base.num_antennas = 64;
        spec.base.num_taps = 4;
        spec.axis = SweepAxis::TapCount;
        spec.values = {1, 2, 4};
        spec.trials = 100;
    } else if (cli.preset == "paper") {
        // full-scale setup; slow
        spec.base.num_devices = 1000;
        spec.base.pilot_length = 72;
        spec.base.num_antennas = 128;
        spec.base.num_taps = 4;
        spec.axis = SweepAxis::TapCount;
        spec.values = {1, 2, 4};
        spec.trials = 1000;
    } else {
        throw CLI::ValidationError("--preset must be desk or paper");
    }
    spec.base.noise_var = 0.1;
    spec.base.activity_prob = 0.07;

    if (cli.N > 0) spec.base.num_devices = cli.N;
    if (cli.M > 0) spec.base.num_antennas = cli.M;
    if (cli.L > 0) spec.base.pilot_length = cli.L;
    if (cli.P > 0) spec.base.num_taps = cli.P;
    if (cli.noise_var > 0.0) spec.base.noise_var = cli.noise_var;
    if (cli.activity_prob >= 0.0) spec.base.activity_prob = cli.activity_prob;
    spec.base.gains = rvec::Constant(spec.base.num_devices, cli.gain);
    if (!cli.axis.empty()) spec.axis = axis_from_name(cli.axis);
    if (!cli.values.empty()) spec.values = cli.values;
    if (cli.trials > 0) spec.trials = cli.trials;

    if (cli.schemes.empty()) {
        spec.schemes = {Scheme::MleDirect, Scheme::MleVirtual, Scheme::BlMle};
    } else {
        for (const auto& name : cli.schemes) spec.schemes.push_back(scheme_from_name(name));
    }
    spec.seed = cli.seed;

    if (cli.rho == "default") {
        spec.rho.mode = RhoPolicy::Mode::Default;
    } else if (cli.rho == "sweep") {
        spec.rho.mode = RhoPolicy::Mode::Sweep;
    } else {
        spec.rho.mode = RhoPolicy::Mode::Fixed;
        spec.rho.value = std::stod(cli.rho);
    }

    if (cli.threads > 0) {
        spec.threads = cli.threads;
    } else if (const char* env = std::getenv("GFAD_THREADS")) {
        spec.threads = std::max(1, std::atoi(env));
    } else {
        spec.threads = 1;
    }
    return spec;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file " + path);
    os << content;
}

int run_sweep(const CliOptions& cli) {
    const ExperimentSpec spec = build_spec(cli);
    std::vector<SweepRow> done;
    try {
        done = sweep(spec);
    } catch (const std::exception& e) {
        // flush whatever completed before rethrowing the diagnostic
        if (!done.empty()) write_output(cli.out_path, sweep_csv(done));
        throw;
    }
    write_output(cli.out_path, sweep_csv(done));
    return 0;
}

int run_bench(const CliOptions& cli) {
    const ExperimentSpec spec = build_spec(cli);
    const auto rows = bench(spec);
    write_output(cli.out_path, bench_csv(rows, spec.schemes.size() > 1));
    return 0;
}

int run_single_trial(const CliOptions& cli) {
    ExperimentSpec spec = build_spec(cli);
    const SystemConfig config = apply_axis(spec.base, spec.axis, spec.values.front());
    const TrialReport report = run_trial(config, spec.schemes, spec.seed, 0, spec.rho);
    std::cout << "truth:";
    for (Eigen::Index n = 0; n < report.truth.size(); ++n) std::cout << ' ' << report.truth[n];
    std::cout << '\n';
    for (const auto& [scheme, result] : report.results) {
        std::cout << scheme_name(scheme) << " (" << result.seconds << " s):";
        for (Eigen::Index n = 0; n < result.scores.size(); ++n)
            std::cout << ' ' << result.scores[n];
        std::cout << '\n';
    }
    return 0;
}

bool report(const char* name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
    return ok;
}

int run_selftest() {
    bool all_ok = true;
    SystemConfig config;
    config.num_devices = 6;
    config.num_antennas = 4;
    config.pilot_length = 16;
    config.num_taps = 3;
    config.noise_var = 0.1;
    config.activity_prob = 0.4;
    config.gains = rvec::Ones(6);

    {  // direct vs effective signal model
        bool ok = true;
        for (std::uint64_t t = 0; t < 10 && ok; ++t) {
            const PilotSet pilots = generate_pilots(config, 7, t);
            const Scene scene = generate_scene(config, 7, t);
            const cmat noise = generate_noise(config, 7, t);
            const cmat a = received_direct(scene, pilots, config, noise);
            const cmat b = received_effective(scene, pilots, config, noise);
            ok = (a - b).norm() <= 1e-9 * std::max(1.0, a.norm());
        }
        all_ok &= report("signal model equivalence", ok);
    }
    {  // derivative-numerator gradient check
        bool ok = true;
        RandomStream rng(11, 0, StreamPurpose::Channel);
        for (int k = 0; k < 20 && ok; ++k) {
            SpectralData sd;
            sd.v = rvec(3), sd.u = rvec(3);
            for (int p = 0; p < 3; ++p) {
                sd.v[p] = 0.2 + 2.0 * rng.uniform();
                sd.u[p] = 2.0 * rng.uniform();
            }
            const RealPolynomial numer = derivative_numerator(sd);
            const double d = rng.uniform() * 0.9;
            const double h = 1e-6;
            const double fd = (delta_objective(sd, d + h) - delta_objective(sd, d - h)) / (2 * h);
            double denom = 1.0;
            for (int p = 0; p < 3; ++p) denom *= (1 + d * sd.v[p]) * (1 + d * sd.v[p]);
            ok = std::abs(numer.evaluate(d) / denom - fd) <= 1e-5 * (1.0 + std::abs(fd));
        }
        all_ok &= report("gradient consistency", ok);
    }
    {  // coordinate step vs grid search
        bool ok = true;
        RandomStream rng(13, 0, StreamPurpose::Channel);
        for (int k = 0; k < 20 && ok; ++k) {
            SpectralData sd;
            sd.v = rvec(2), sd.u = rvec(2);
            for (int p = 0; p < 2; ++p) {
                sd.v[p] = 0.2 + 2.0 * rng.uniform();
                sd.u[p] = 3.0 * rng.uniform();
            }
            const double alpha = rng.uniform() * std::min(1.0, 0.9 / sd.v.maxCoeff());
            const double d_star = coordinate_step(sd, alpha);
            double grid_best = 1e300;
            for (int i = 0; i <= 10000; ++i) {
                const double d = -alpha + i / 10000.0;
                grid_best = std::min(grid_best, delta_objective(sd, d));
            }
            ok = delta_objective(sd, d_star) <= grid_best + 1e-6;
        }
        all_ok &= report("coordinate step optimality", ok);
    }
    {  // a detect run must not end above the all-zero objective
        const PilotSet pilots = generate_pilots(config, 5, 0);
        const Scene scene = generate_scene(config, 5, 0);
        const cmat noise = generate_noise(config, 5, 0);
        const cmat sample_cov = sample_covariance(received_effective(scene, pilots, config, noise));
        const rvec alpha = detect_direct(sample_cov, pilots, config);
        const std::vector<double> at_alpha(alpha.data(), alpha.data() + alpha.size());
        const std::vector<double> at_zero(static_cast<std::size_t>(alpha.size()), 0.0);
        const double f1 = model_objective(at_alpha, pilots.blocks, config.gains,
                                          config.noise_var, sample_cov);
        const double f0 = model_objective(at_zero, pilots.blocks, config.gains,
                                          config.noise_var, sample_cov);
        all_ok &= report("detector objective improves on all-zero start", f1 <= f0 + 1e-9);
    }
    {  // threshold optimizer vs exhaustive scan
        RandomStream rng(17, 0, StreamPurpose::Channel);
        std::vector<rvec> scores(4);
        std::vector<ivec> truths(4);
        for (int t = 0; t < 4; ++t) {
            scores[static_cast<std::size_t>(t)] = rvec(20);
            truths[static_cast<std::size_t>(t)] = ivec(20);
            for (int n = 0; n < 20; ++n) {
                scores[static_cast<std::size_t>(t)][n] = rng.uniform();
                truths[static_cast<std::size_t>(t)][n] = rng.bernoulli(0.3) ? 1 : 0;
            }
        }
        const ThresholdResult opt = optimize_threshold(scores, truths);
        double scan_best = 1e300;
        for (int i = 0; i <= 10000; ++i) {
            const double theta = -0.1 + 1.2 * i / 10000.0;
            double err = 0.0;
            for (int t = 0; t < 4; ++t) {
                ivec dec(20);
                for (int n = 0; n < 20; ++n)
                    dec[n] = scores[static_cast<std::size_t>(t)][n] > theta ? 1 : 0;
                err += error_rate(dec, truths[static_cast<std::size_t>(t)]);
            }
            scan_best = std::min(scan_best, err / 4.0);
        }
        all_ok &= report("threshold optimizer vs exhaustive scan",
                         std::abs(opt.error - scan_best) <= 1e-12);
    }
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grant-free activity detection Monte-Carlo harness"};
    app.require_subcommand(1);
    app.set_config("--config");

    CliOptions cli;
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--preset", cli.preset, "base parameter preset: desk or paper");
        cmd->add_option("--N", cli.N, "device count");
        cmd->add_option("--M", cli.M, "antenna count");
        cmd->add_option("--L", cli.L, "pilot length / subcarrier count");
        cmd->add_option("--P", cli.P, "channel tap count");
        cmd->add_option("--noise-var", cli.noise_var, "noise variance");
        cmd->add_option("--activity-prob", cli.activity_prob, "per-device activity probability");
        cmd->add_option("--gain", cli.gain, "common large-scale gain");
        cmd->add_option("--axis", cli.axis, "sweep axis: P, L, M, N, noise_var");
        cmd->add_option("--values", cli.values, "sweep values");
        cmd->add_option("--trials", cli.trials, "Monte-Carlo trials per sweep point");
        cmd->add_option("--schemes", cli.schemes, "mle-direct, mle-virtual, bl-mle");
        cmd->add_option("--seed", cli.seed, "root RNG seed");
        cmd->add_option("--rho", cli.rho, "penalty weight: number, 'default', or 'sweep'");
        cmd->add_option("--out", cli.out_path, "CSV output path ('-' = stdout)");
        cmd->add_option("--threads", cli.threads,
                        "worker threads (default: GFAD_THREADS env or 1)");
        cmd->set_config("--config");
    };

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "error-rate sweep, CSV output");
    CLI::App* bench_cmd = app.add_subcommand("bench", "detector timing benchmark");
    CLI::App* trial_cmd = app.add_subcommand("trial", "single-trial debug dump");
    app.add_subcommand("selftest", "run condensed oracle checks");
    add_common(sweep_cmd);
    add_common(bench_cmd);
    add_common(trial_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep_cmd->parsed()) return run_sweep(cli);
        if (bench_cmd->parsed()) return run_bench(cli);
        if (trial_cmd->parsed()) return run_single_trial(cli);
        return run_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
