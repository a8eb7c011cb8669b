#pragma once

#include <cstdint>
#include <cmath>
#include <complex>

namespace gfad {

// Counter-based substream scheme: every random draw comes from a stream keyed by
// (root seed, trial index, purpose). Streams are derived by splitmix64 mixing, so
// pilots / channels / activities / noise of one trial never overlap each other or
// any other trial, and output is identical regardless of thread count.
enum class StreamPurpose : std::uint64_t {
    Pilots = 1,
    Channel = 2,
    Activity = 3,
    Noise = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic stream of uniforms / Gaussians. Implemented directly on top of
/// splitmix64 so output is bit-identical across platforms.
class RandomStream {
  public:
    RandomStream(std::uint64_t root_seed, std::uint64_t trial, StreamPurpose purpose)
        : state_(splitmix64(splitmix64(root_seed) ^ splitmix64(trial * 0x2545f4914f6cdd1dULL)
                            ^ splitmix64(static_cast<std::uint64_t>(purpose) * 0xda942042e4dd58b5ULL))) {}

    std::uint64_t next_u64() {
        state_ = splitmix64(state_);
        return state_;
    }

    /// Uniform in (0,1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard real Gaussian (Box-Muller, one value per call pair cached).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    /// CN(0,1): variance 1/2 per real component.
    std::complex<double> complex_gaussian() {
        return {gaussian() * M_SQRT1_2, gaussian() * M_SQRT1_2};
    }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace gfad
