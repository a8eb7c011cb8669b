#pragma once

#include "gfad/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace gfad {

enum class Scheme { MleDirect, MleVirtual, BlMle };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);  // throws on unknown name

struct RhoPolicy {
    enum class Mode { Default, Fixed, Sweep } mode = Mode::Default;
    double value = 0.0;       ///< used by Fixed
    double multiplier = 1.0;  ///< scales the default tr(SampleCov)/L
};

enum class SweepAxis { TapCount, PilotLength, AntennaCount, DeviceCount, NoiseVar };

std::string axis_name(SweepAxis axis);
SweepAxis axis_from_name(const std::string& name);

struct ExperimentSpec {
    SystemConfig base;
    SweepAxis axis = SweepAxis::TapCount;
    std::vector<double> values;
    int trials = 1;
    std::vector<Scheme> schemes;
    std::uint64_t seed = 0;
    RhoPolicy rho;
    int threads = 1;  ///< trial-level parallelism; output independent of the count

    void validate() const;  // throws, e.g. "no schemes requested"
};

/// base config with one axis overridden (gains resized to a constant when N changes).
SystemConfig apply_axis(const SystemConfig& base, SweepAxis axis, double value);

struct SchemeResult {
    rvec scores;     ///< length N, continuous activities in [0,1]
    double seconds;  ///< wall-clock time of the detect call
    double rho_used = 0.0;  ///< only meaningful for the virtual schemes
};

struct TrialReport {
    ivec truth;
    std::map<Scheme, SchemeResult> results;
};

TrialReport run_trial(const SystemConfig& config, const std::vector<Scheme>& schemes,
                      std::uint64_t root_seed, std::uint64_t trial_index,
                      const RhoPolicy& rho = {});

/// Hamming error fraction between two binary vectors of equal length.
double error_rate(const ivec& decisions, const ivec& truth);

struct ThresholdResult {
    double threshold;
    double error;  ///< mean per-device error rate at that threshold
};

/// Best common threshold over the pooled trials: candidates are midpoints of
/// adjacent sorted unique scores plus one value below and above everything;
/// ties resolved toward the smallest threshold. Decision rule: score > theta.
ThresholdResult optimize_threshold(const std::vector<rvec>& score_sets,
                                   const std::vector<ivec>& truths);

struct SweepRow {
    std::string sweep_param;
    double sweep_value;
    std::string scheme;
    int trials;
    double mean_error_rate;
    double stderr_error_rate;
    double threshold;
    double mean_seconds;
};

/// One row per (sweep value, scheme). `on_row`, when set, is invoked as each row
/// completes so partial results can be flushed if a later point fails.
std::vector<SweepRow> sweep(const ExperimentSpec& spec,
                            const std::function<void(const SweepRow&)>& on_row = {});

/// CSV with the fixed header
/// sweep_param,sweep_value,scheme,trials,mean_error_rate,stderr_error_rate,threshold,mean_seconds
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct BenchRow {
    std::string sweep_param;
    double sweep_value;
    std::string scheme;
    int reps;
    double median_seconds;
    double time_ratio = -1.0;  ///< direct/virtual; < 0 means "not applicable"
};

/// Median detect wall time per scheme and sweep value; >= `reps` repetitions
/// with one discarded warm-up call. The ratio column is filled only when both
/// algorithms are requested.
std::vector<BenchRow> bench(const ExperimentSpec& spec, int reps = 5);

std::string bench_csv(const std::vector<BenchRow>& rows, bool with_ratio);

}  // namespace gfad
