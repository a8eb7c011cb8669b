#include "gfad/harness.hpp"

#include "gfad/mle_direct.hpp"
#include "gfad/mle_virtual.hpp"
#include "gfad/signal_model.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace gfad {

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::MleDirect: return "mle-direct";
        case Scheme::MleVirtual: return "mle-virtual";
        case Scheme::BlMle: return "bl-mle";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "mle-direct") return Scheme::MleDirect;
    if (name == "mle-virtual") return Scheme::MleVirtual;
    if (name == "bl-mle") return Scheme::BlMle;
    throw std::invalid_argument("unknown scheme: " + name);
}

std::string axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::TapCount: return "P";
        case SweepAxis::PilotLength: return "L";
        case SweepAxis::AntennaCount: return "M";
        case SweepAxis::DeviceCount: return "N";
        case SweepAxis::NoiseVar: return "noise_var";
    }
    return "?";
}

SweepAxis axis_from_name(const std::string& name) {
    if (name == "P") return SweepAxis::TapCount;
    if (name == "L") return SweepAxis::PilotLength;
    if (name == "M") return SweepAxis::AntennaCount;
    if (name == "N") return SweepAxis::DeviceCount;
    if (name == "noise_var") return SweepAxis::NoiseVar;
    throw std::invalid_argument("unknown sweep axis: " + name);
}

SystemConfig apply_axis(const SystemConfig& base, SweepAxis axis, double value) {
    SystemConfig cfg = base;
    if (axis != SweepAxis::NoiseVar && value != std::floor(value))
        throw std::invalid_argument("sweep value for " + axis_name(axis) + " must be an integer");
    switch (axis) {
        case SweepAxis::TapCount: cfg.num_taps = static_cast<int>(value); break;
        case SweepAxis::PilotLength: cfg.pilot_length = static_cast<int>(value); break;
        case SweepAxis::AntennaCount: cfg.num_antennas = static_cast<int>(value); break;
        case SweepAxis::DeviceCount: {
            cfg.num_devices = static_cast<int>(value);
            const double g = base.gains.size() > 0 ? base.gains[0] : 1.0;
            cfg.gains = rvec::Constant(cfg.num_devices, g);
            break;
        }
        case SweepAxis::NoiseVar: cfg.noise_var = value; break;
    }
    cfg.validate();
    return cfg;
}

void ExperimentSpec::validate() const {
    if (schemes.empty()) throw std::invalid_argument("no schemes requested");
    if (trials < 1) throw std::invalid_argument("trial count must be >= 1");
    if (values.empty()) throw std::invalid_argument("sweep value list is empty");
    for (double v : values) apply_axis(base, axis, v);  // throws if P < L etc. breaks
}

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

TrialReport run_trial(const SystemConfig& config, const std::vector<Scheme>& schemes,
                      std::uint64_t root_seed, std::uint64_t trial_index, const RhoPolicy& rho) {
    config.validate();
    if (schemes.empty()) throw std::invalid_argument("no schemes requested");
    try {
        const PilotSet pilots = generate_pilots(config, root_seed, trial_index);
        const Scene scene = generate_scene(config, root_seed, trial_index);
        const cmat noise = generate_noise(config, root_seed, trial_index);
        const cmat received = received_effective(scene, pilots, config, noise);
        const cmat sample_cov = sample_covariance(received);
        const double default_rho =
            sample_cov.trace().real() / static_cast<double>(config.pilot_length);

        TrialReport report;
        report.truth = scene.activities;
        for (Scheme scheme : schemes) {
            SchemeResult result;
            const double t0 = now_seconds();
            switch (scheme) {
                case Scheme::MleDirect:
                    result.scores = detect_direct(sample_cov, pilots, config);
                    break;
                case Scheme::MleVirtual: {
                    VirtualDetectOptions opts;
                    opts.rho = rho.mode == RhoPolicy::Mode::Fixed ? rho.value
                                                                  : rho.multiplier * default_rho;
                    result.rho_used = opts.rho;
                    const rvec beta = detect_virtual(sample_cov, pilots, config, opts);
                    result.scores = map_to_alpha(beta, config.num_devices, config.num_taps);
                    break;
                }
                case Scheme::BlMle: {
                    VirtualDetectOptions opts;
                    opts.rho = 0.0;
                    const rvec beta = detect_virtual(sample_cov, pilots, config, opts);
                    result.scores = map_to_alpha(beta, config.num_devices, config.num_taps);
                    break;
                }
            }
            result.seconds = now_seconds() - t0;
            report.results[scheme] = std::move(result);
        }
        return report;
    } catch (const std::exception& e) {
        throw std::runtime_error("trial " + std::to_string(trial_index) + ": " + e.what());
    }
}

double error_rate(const ivec& decisions, const ivec& truth) {
    if (decisions.size() != truth.size())
        throw std::invalid_argument("error_rate: length mismatch");
    int errors = 0;
    for (Eigen::Index n = 0; n < truth.size(); ++n)
        if ((decisions[n] != 0) != (truth[n] != 0)) ++errors;
    return static_cast<double>(errors) / static_cast<double>(truth.size());
}

ThresholdResult optimize_threshold(const std::vector<rvec>& score_sets,
                                   const std::vector<ivec>& truths) {
    if (score_sets.empty() || score_sets.size() != truths.size())
        throw std::invalid_argument("optimize_threshold: need matching nonempty score/truth sets");
    struct Item {
        double score;
        int active;
    };
    std::vector<Item> items;
    long total_active = 0;
    for (std::size_t t = 0; t < score_sets.size(); ++t) {
        if (score_sets[t].size() != truths[t].size())
            throw std::invalid_argument("optimize_threshold: score/truth length mismatch");
        for (Eigen::Index n = 0; n < score_sets[t].size(); ++n) {
            items.push_back({score_sets[t][n], truths[t][n] != 0 ? 1 : 0});
            total_active += items.back().active;
        }
    }
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.score < b.score; });
    const long K = static_cast<long>(items.size());
    const long total_inactive = K - total_active;

    // decision rule: score > theta. Walking theta up past k items flips them to
    // "inactive": errors(k) = actives among first k + inactives among the rest.
    double best_theta = items.front().score - 0.5;
    long best_errors = total_inactive;  // k = 0
    long act_k = 0;
    for (long k = 1; k <= K; ++k) {
        act_k += items[static_cast<std::size_t>(k - 1)].active;
        // only cut between distinct scores (or above the top)
        if (k < K && items[static_cast<std::size_t>(k)].score
                         <= items[static_cast<std::size_t>(k - 1)].score)
            continue;
        const long inact_k = k - act_k;
        const long errors = act_k + (total_inactive - inact_k);
        if (errors < best_errors) {
            best_errors = errors;
            best_theta = k == K ? items.back().score + 0.5
                                : 0.5 * (items[static_cast<std::size_t>(k - 1)].score
                                         + items[static_cast<std::size_t>(k)].score);
        }
    }
    return {best_theta, static_cast<double>(best_errors) / static_cast<double>(K)};
}

namespace {

std::vector<TrialReport> run_trials(const SystemConfig& config, const std::vector<Scheme>& schemes,
                                    std::uint64_t seed, int trials, const RhoPolicy& rho,
                                    int threads) {
    std::vector<TrialReport> reports(static_cast<std::size_t>(trials));
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const int t = next.fetch_add(1);
            if (t >= trials) break;
            try {
                reports[static_cast<std::size_t>(t)] =
                    run_trial(config, schemes, seed, static_cast<std::uint64_t>(t), rho);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                error_message = e.what();
                failed.store(true);
            }
        }
    };
    const int nthreads = std::clamp(threads, 1, trials);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw std::runtime_error(error_message);
    return reports;
}

struct SchemeStats {
    double mean_error, stderr_error, threshold, mean_seconds;
};

SchemeStats aggregate(const std::vector<TrialReport>& reports, Scheme scheme) {
    std::vector<rvec> scores;
    std::vector<ivec> truths;
    double seconds = 0.0;
    for (const auto& report : reports) {
        const auto& result = report.results.at(scheme);
        scores.push_back(result.scores);
        truths.push_back(report.truth);
        seconds += result.seconds;
    }
    const ThresholdResult thr = optimize_threshold(scores, truths);
    const int T = static_cast<int>(reports.size());
    std::vector<double> per_trial(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        ivec decisions(scores[static_cast<std::size_t>(t)].size());
        for (Eigen::Index n = 0; n < decisions.size(); ++n)
            decisions[n] = scores[static_cast<std::size_t>(t)][n] > thr.threshold ? 1 : 0;
        per_trial[static_cast<std::size_t>(t)] = error_rate(decisions, truths[static_cast<std::size_t>(t)]);
    }
    double mean = 0.0;
    for (double e : per_trial) mean += e;
    mean /= T;
    double var = 0.0;
    for (double e : per_trial) var += (e - mean) * (e - mean);
    const double stderr_error = T > 1 ? std::sqrt(var / (T - 1)) / std::sqrt(static_cast<double>(T)) : 0.0;
    return {mean, stderr_error, thr.threshold, seconds / T};
}

}  // namespace

std::vector<SweepRow> sweep(const ExperimentSpec& spec,
                            const std::function<void(const SweepRow&)>& on_row) {
    spec.validate();
    std::vector<SweepRow> rows;
    for (double value : spec.values) {
        const SystemConfig config = apply_axis(spec.base, spec.axis, value);
        for (Scheme scheme : spec.schemes) {
            SchemeStats best{};
            bool have = false;
            std::vector<RhoPolicy> policies;
            if (scheme == Scheme::MleVirtual && spec.rho.mode == RhoPolicy::Mode::Sweep) {
                for (double mult : {0.1, 1.0, 10.0})
                    policies.push_back({RhoPolicy::Mode::Default, 0.0, mult});
            } else {
                policies.push_back(spec.rho);
            }
            for (const RhoPolicy& policy : policies) {
                const auto reports =
                    run_trials(config, {scheme}, spec.seed, spec.trials, policy, spec.threads);
                const SchemeStats stats = aggregate(reports, scheme);
                if (!have || stats.mean_error < best.mean_error) {
                    best = stats;
                    have = true;
                }
            }
            rows.push_back({axis_name(spec.axis), value, scheme_name(scheme), spec.trials,
                            best.mean_error, best.stderr_error, best.threshold,
                            best.mean_seconds});
            if (on_row) on_row(rows.back());
        }
    }
    return rows;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "sweep_param,sweep_value,scheme,trials,mean_error_rate,stderr_error_rate,threshold,"
        "mean_seconds\n";
    for (const auto& r : rows) {
        out += r.sweep_param + "," + format_double(r.sweep_value) + "," + r.scheme + ","
             + std::to_string(r.trials) + "," + format_double(r.mean_error_rate) + ","
             + format_double(r.stderr_error_rate) + "," + format_double(r.threshold) + ","
             + format_double(r.mean_seconds) + "\n";
    }
    return out;
}

std::vector<BenchRow> bench(const ExperimentSpec& spec, int reps) {
    spec.validate();
    reps = std::max(reps, 5);
    std::vector<BenchRow> rows;
    for (double value : spec.values) {
        const SystemConfig config = apply_axis(spec.base, spec.axis, value);
        const PilotSet pilots = generate_pilots(config, spec.seed, 0);
        const Scene scene = generate_scene(config, spec.seed, 0);
        const cmat noise = generate_noise(config, spec.seed, 0);
        const cmat sample_cov = sample_covariance(received_effective(scene, pilots, config, noise));

        std::map<Scheme, double> medians;
        for (Scheme scheme : spec.schemes) {
            auto run_once = [&] {
                if (scheme == Scheme::MleDirect) {
                    detect_direct(sample_cov, pilots, config);
                } else {
                    VirtualDetectOptions opts;
                    opts.rho = scheme == Scheme::BlMle ? 0.0 : spec.rho.value;
                    if (scheme == Scheme::MleVirtual && spec.rho.mode != RhoPolicy::Mode::Fixed)
                        opts.rho = -1.0;
                    detect_virtual(sample_cov, pilots, config, opts);
                }
            };
            run_once();  // warm-up, discarded
            std::vector<double> times(static_cast<std::size_t>(reps));
            for (int r = 0; r < reps; ++r) {
                const double t0 = now_seconds();
                run_once();
                times[static_cast<std::size_t>(r)] = now_seconds() - t0;
            }
            std::sort(times.begin(), times.end());
            medians[scheme] = times[static_cast<std::size_t>(reps / 2)];
        }

        double ratio = -1.0;
        const bool have_direct = medians.count(Scheme::MleDirect) > 0;
        const Scheme virt = medians.count(Scheme::MleVirtual) ? Scheme::MleVirtual : Scheme::BlMle;
        if (have_direct && medians.count(virt) && spec.schemes.size() > 1)
            ratio = medians[Scheme::MleDirect] / medians[virt];
        for (Scheme scheme : spec.schemes)
            rows.push_back({axis_name(spec.axis), value, scheme_name(scheme), reps,
                            medians[scheme], ratio});
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows, bool with_ratio) {
    std::string out = "sweep_param,sweep_value,scheme,reps,median_seconds";
    if (with_ratio) out += ",time_ratio_direct_over_virtual";
    out += "\n";
    for (const auto& r : rows) {
        out += r.sweep_param + "," + format_double(r.sweep_value) + "," + r.scheme + ","
             + std::to_string(r.reps) + "," + format_double(r.median_seconds);
        if (with_ratio) out += "," + format_double(r.time_ratio);
        out += "\n";
    }
    return out;
}

}  // namespace gfad
