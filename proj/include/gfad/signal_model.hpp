#pragma once

#include "gfad/types.hpp"

#include <cstdint>
#include <string>

namespace gfad {

/// Normalized DFT matrix, F(l,l') = exp(-j*2*pi*l*l'/L)/sqrt(L) (zero-based indices).
cmat dft_matrix(int L);

/// Circulant matrix with the given first column; column j is the cyclic downshift
/// of column j-1.
cmat circulant(const cvec& first_col);

/// i.i.d. CN(0,I_L) pilot columns rescaled to norm sqrt(L), plus the derived
/// effective blocks. Deterministic in (seed, trial).
PilotSet generate_pilots(const SystemConfig& config, std::uint64_t root_seed,
                         std::uint64_t trial = 0);

/// Build the effective blocks for externally supplied frequency pilots (test hook).
PilotSet make_pilot_set(const cmat& freq_pilots, int num_taps);

/// Bernoulli activities and CN(0,1) taps. Deterministic in (seed, trial).
Scene generate_scene(const SystemConfig& config, std::uint64_t root_seed,
                     std::uint64_t trial = 0);

/// i.i.d. CN(0, noise_var) L x M noise block.
cmat generate_noise(const SystemConfig& config, std::uint64_t root_seed,
                    std::uint64_t trial = 0);

/// Received pilots assembled from full L x L circulant channel operators.
cmat received_direct(const Scene& scene, const PilotSet& pilots, const SystemConfig& config,
                     const cmat& noise);

/// Received pilots assembled from the effective L x P blocks acting on the P taps.
cmat received_effective(const Scene& scene, const PilotSet& pilots, const SystemConfig& config,
                        const cmat& noise);

/// Sample covariance R*R^H / M.
cmat sample_covariance(const cmat& received);

/// Binary serialization (little-endian dimensions header + row-major complex
/// pairs of doubles); format documented in the README.
void save_pilots(const PilotSet& pilots, const std::string& path);
PilotSet load_pilots(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

}  // namespace gfad
