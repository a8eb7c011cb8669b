#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gfad {

using cplx = std::complex<double>;
using cmat = Eigen::MatrixXcd;
using cvec = Eigen::VectorXcd;
using rmat = Eigen::MatrixXd;
using rvec = Eigen::VectorXd;
using ivec = Eigen::VectorXi;

/// System dimensions and statistics shared by the whole pipeline.
struct SystemConfig {
    int num_devices = 0;    ///< N
    int num_antennas = 0;   ///< M
    int pilot_length = 0;   ///< L (subcarriers)
    int num_taps = 0;       ///< P, must satisfy 1 <= P < L
    double noise_var = 0.0; ///< sigma^2
    double activity_prob = 0.0;
    rvec gains;             ///< large-scale fading power per device, size N

    void validate() const {
        if (num_devices < 1) throw std::invalid_argument("SystemConfig: N must be >= 1");
        if (num_antennas < 1) throw std::invalid_argument("SystemConfig: M must be >= 1");
        if (num_taps < 1 || num_taps >= pilot_length)
            throw std::invalid_argument("SystemConfig: need 1 <= P < L");
        if (!(noise_var > 0.0)) throw std::invalid_argument("SystemConfig: noise_var must be > 0");
        if (activity_prob < 0.0 || activity_prob > 1.0)
            throw std::invalid_argument("SystemConfig: activity_prob must be in [0,1]");
        if (gains.size() != num_devices)
            throw std::invalid_argument("SystemConfig: gains length must equal N");
        if ((gains.array() < 0.0).any())
            throw std::invalid_argument("SystemConfig: gains must be >= 0");
    }
};

/// Frequency-domain pilots plus the derived time-domain tap blocks.
struct PilotSet {
    cmat freq;                 ///< L x N, column n is the pilot of device n
    std::vector<cmat> blocks;  ///< N blocks, each L x P
    cmat stacked;              ///< L x (N*P), horizontal concatenation of blocks
};

/// Per-device channel taps; entry n is a P x M matrix (column m = taps towards antenna m).
struct ChannelRealization {
    std::vector<cmat> taps;
};

struct Scene {
    ivec activities;  ///< length N, entries in {0,1}
    ChannelRealization channel;
    std::uint64_t seed = 0;
};

}  // namespace gfad
