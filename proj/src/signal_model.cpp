#include "gfad/signal_model.hpp"

#include "gfad/rng.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace gfad {

cmat dft_matrix(int L) {
    cmat f(L, L);
    const double scale = 1.0 / std::sqrt(static_cast<double>(L));
    for (int r = 0; r < L; ++r) {
        for (int c = 0; c < L; ++c) {
            double phase = -2.0 * M_PI * static_cast<double>((static_cast<long long>(r) * c) % L) / L;
            f(r, c) = scale * cplx(std::cos(phase), std::sin(phase));
        }
    }
    return f;
}

cmat circulant(const cvec& first_col) {
    const int L = static_cast<int>(first_col.size());
    cmat h(L, L);
    for (int j = 0; j < L; ++j)
        for (int i = 0; i < L; ++i) h(i, j) = first_col[(i - j + L) % L];
    return h;
}

PilotSet make_pilot_set(const cmat& freq_pilots, int num_taps) {
    const int L = static_cast<int>(freq_pilots.rows());
    const int N = static_cast<int>(freq_pilots.cols());
    const int P = num_taps;
    if (P < 1 || P >= L) throw std::invalid_argument("make_pilot_set: need 1 <= P < L");
    const cmat f = dft_matrix(L);
    PilotSet out;
    out.freq = freq_pilots;
    out.blocks.reserve(N);
    out.stacked.resize(L, static_cast<Eigen::Index>(N) * P);
    for (int n = 0; n < N; ++n) {
        cmat full = f.adjoint() * freq_pilots.col(n).asDiagonal() * f;
        out.blocks.push_back(full.leftCols(P));
        out.stacked.middleCols(static_cast<Eigen::Index>(n) * P, P) = out.blocks.back();
    }
    return out;
}

PilotSet generate_pilots(const SystemConfig& config, std::uint64_t root_seed, std::uint64_t trial) {
    config.validate();
    const int L = config.pilot_length;
    const int N = config.num_devices;
    RandomStream rng(root_seed, trial, StreamPurpose::Pilots);
    cmat freq(L, N);
    for (int n = 0; n < N; ++n) {
        for (int l = 0; l < L; ++l) freq(l, n) = rng.complex_gaussian();
        freq.col(n) *= std::sqrt(static_cast<double>(L)) / freq.col(n).norm();
    }
    return make_pilot_set(freq, config.num_taps);
}

Scene generate_scene(const SystemConfig& config, std::uint64_t root_seed, std::uint64_t trial) {
    config.validate();
    Scene scene;
    scene.seed = root_seed;
    RandomStream act(root_seed, trial, StreamPurpose::Activity);
    scene.activities.resize(config.num_devices);
    for (int n = 0; n < config.num_devices; ++n)
        scene.activities[n] = act.bernoulli(config.activity_prob) ? 1 : 0;
    RandomStream chan(root_seed, trial, StreamPurpose::Channel);
    scene.channel.taps.reserve(config.num_devices);
    for (int n = 0; n < config.num_devices; ++n) {
        cmat taps(config.num_taps, config.num_antennas);
        for (int m = 0; m < config.num_antennas; ++m)
            for (int p = 0; p < config.num_taps; ++p) taps(p, m) = chan.complex_gaussian();
        scene.channel.taps.push_back(std::move(taps));
    }
    return scene;
}

cmat generate_noise(const SystemConfig& config, std::uint64_t root_seed, std::uint64_t trial) {
    RandomStream rng(root_seed, trial, StreamPurpose::Noise);
    cmat noise(config.pilot_length, config.num_antennas);
    const double sigma = std::sqrt(config.noise_var);
    for (int m = 0; m < config.num_antennas; ++m)
        for (int l = 0; l < config.pilot_length; ++l) noise(l, m) = sigma * rng.complex_gaussian();
    return noise;
}

namespace {

void check_dims(const Scene& scene, const PilotSet& pilots, const SystemConfig& config,
                const cmat& noise) {
    if (scene.activities.size() != config.num_devices)
        throw std::invalid_argument("received signal: activities length != N");
    if (static_cast<int>(scene.channel.taps.size()) != config.num_devices)
        throw std::invalid_argument("received signal: channel device axis != N");
    if (pilots.freq.rows() != config.pilot_length || pilots.freq.cols() != config.num_devices)
        throw std::invalid_argument("received signal: pilot matrix is not L x N");
    if (noise.rows() != config.pilot_length || noise.cols() != config.num_antennas)
        throw std::invalid_argument("received signal: noise matrix is not L x M");
    for (const auto& taps : scene.channel.taps)
        if (taps.rows() != config.num_taps || taps.cols() != config.num_antennas)
            throw std::invalid_argument("received signal: tap block is not P x M");
}

}  // namespace

cmat received_direct(const Scene& scene, const PilotSet& pilots, const SystemConfig& config,
                     const cmat& noise) {
    check_dims(scene, pilots, config, noise);
    const int L = config.pilot_length;
    const int M = config.num_antennas;
    const cmat f = dft_matrix(L);
    cmat received = noise;
    for (int n = 0; n < config.num_devices; ++n) {
        if (scene.activities[n] == 0) continue;
        const double amp = std::sqrt(config.gains[n]);
        // The 1/sqrt(L) makes the circulant route coincide with the tap-block
        // route: eigenvalues of circulant(c) are sqrt(L) * (F*c), so without it
        // the two models would differ by a global sqrt(L).
        const cvec time_pilot = (f.adjoint() * pilots.freq.col(n)) / std::sqrt(static_cast<double>(L));
        for (int m = 0; m < M; ++m) {
            cvec first_col = cvec::Zero(L);
            first_col.head(config.num_taps) = scene.channel.taps[n].col(m);
            received.col(m) += amp * (circulant(first_col) * time_pilot);
        }
    }
    return received;
}

cmat received_effective(const Scene& scene, const PilotSet& pilots, const SystemConfig& config,
                        const cmat& noise) {
    check_dims(scene, pilots, config, noise);
    cmat received = noise;
    for (int n = 0; n < config.num_devices; ++n) {
        if (scene.activities[n] == 0) continue;
        received += std::sqrt(config.gains[n]) * (pilots.blocks[n] * scene.channel.taps[n]);
    }
    return received;
}

cmat sample_covariance(const cmat& received) {
    const double M = static_cast<double>(received.cols());
    cmat cov = (received * received.adjoint()) / M;
    // kill roundoff asymmetry
    return 0.5 * (cov + cmat(cov.adjoint()));
}

namespace {

constexpr std::uint32_t kPilotMagic = 0x4c504647;  // "GFPL"
constexpr std::uint32_t kSceneMagic = 0x43534647;  // "GFSC"

void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

// row-major complex pairs, real then imaginary, little-endian doubles
void write_cmat(std::ostream& os, const cmat& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            double re = m(r, c).real(), im = m(r, c).imag();
            os.write(reinterpret_cast<const char*>(&re), 8);
            os.write(reinterpret_cast<const char*>(&im), 8);
        }
}

cmat read_cmat(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
    cmat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            double re = 0, im = 0;
            is.read(reinterpret_cast<char*>(&re), 8);
            is.read(reinterpret_cast<char*>(&im), 8);
            m(r, c) = cplx(re, im);
        }
    return m;
}

}  // namespace

void save_pilots(const PilotSet& pilots, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_pilots: cannot open " + path);
    const int P = pilots.blocks.empty() ? 0 : static_cast<int>(pilots.blocks[0].cols());
    write_u32(os, kPilotMagic);
    write_u32(os, 1);
    write_u32(os, static_cast<std::uint32_t>(pilots.freq.rows()));
    write_u32(os, static_cast<std::uint32_t>(pilots.freq.cols()));
    write_u32(os, static_cast<std::uint32_t>(P));
    write_cmat(os, pilots.freq);
    if (!os) throw std::runtime_error("save_pilots: write failed for " + path);
}

PilotSet load_pilots(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_pilots: cannot open " + path);
    if (read_u32(is) != kPilotMagic) throw std::runtime_error("load_pilots: bad magic");
    if (read_u32(is) != 1) throw std::runtime_error("load_pilots: unsupported version");
    const auto L = read_u32(is);
    const auto N = read_u32(is);
    const auto P = read_u32(is);
    cmat freq = read_cmat(is, L, N);
    if (!is) throw std::runtime_error("load_pilots: truncated file");
    return make_pilot_set(freq, static_cast<int>(P));
}

void save_scene(const Scene& scene, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_scene: cannot open " + path);
    const int N = static_cast<int>(scene.activities.size());
    const int P = scene.channel.taps.empty() ? 0 : static_cast<int>(scene.channel.taps[0].rows());
    const int M = scene.channel.taps.empty() ? 0 : static_cast<int>(scene.channel.taps[0].cols());
    write_u32(os, kSceneMagic);
    write_u32(os, 1);
    write_u32(os, static_cast<std::uint32_t>(N));
    write_u32(os, static_cast<std::uint32_t>(P));
    write_u32(os, static_cast<std::uint32_t>(M));
    write_u64(os, scene.seed);
    for (int n = 0; n < N; ++n) {
        std::uint8_t a = scene.activities[n] ? 1 : 0;
        os.write(reinterpret_cast<const char*>(&a), 1);
    }
    for (const auto& taps : scene.channel.taps) write_cmat(os, taps);
    if (!os) throw std::runtime_error("save_scene: write failed for " + path);
}

Scene load_scene(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_scene: cannot open " + path);
    if (read_u32(is) != kSceneMagic) throw std::runtime_error("load_scene: bad magic");
    if (read_u32(is) != 1) throw std::runtime_error("load_scene: unsupported version");
    const auto N = read_u32(is);
    const auto P = read_u32(is);
    const auto M = read_u32(is);
    Scene scene;
    scene.seed = read_u64(is);
    scene.activities.resize(N);
    for (std::uint32_t n = 0; n < N; ++n) {
        std::uint8_t a = 0;
        is.read(reinterpret_cast<char*>(&a), 1);
        scene.activities[static_cast<int>(n)] = a ? 1 : 0;
    }
    scene.channel.taps.reserve(N);
    for (std::uint32_t n = 0; n < N; ++n) scene.channel.taps.push_back(read_cmat(is, P, M));
    if (!is) throw std::runtime_error("load_scene: truncated file");
    return scene;
}

}  // namespace gfad
