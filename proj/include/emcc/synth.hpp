#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "emcc/minutiae.hpp"

namespace emcc {

/// Per-impression distortion applied to a finger's base minutiae set.
struct NoiseModel {
    double rotation_deg = 15.0;     // uniform in [-r, r], about the canvas centre
    double translation_px = 20.0;   // uniform in [-t, t] per axis
    double jitter_px = 2.0;         // Gaussian sigma per coordinate
    double jitter_theta = 0.05;     // Gaussian sigma, radians
    double drop_rate = 0.10;        // probability a base minutia is missing
    double spurious_rate = 0.10;    // expected spurious minutiae per base minutia

    static NoiseModel none() { return {0, 0, 0, 0, 0, 0}; }
};

struct SynthParams {
    std::size_t fingers = 100;
    std::size_t impressions = 8;
    std::uint32_t canvas_width = 388;
    std::uint32_t canvas_height = 374;
    std::uint32_t dpi = 500;
    std::size_t min_minutiae = 30;
    std::size_t max_minutiae = 60;
    double min_spacing_px = 8.0;
    NoiseModel noise;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Finger-major records with ids "1".."F" and "1".."I". Deterministic per
/// seed on every platform (mt19937_64 with hand-rolled distributions).
std::vector<MinutiaeRecord> synth_records(const SynthParams& params);

/// Writes synth_records into `dir` as <finger>_<impression>.min files.
void synth_dataset(const SynthParams& params, const std::filesystem::path& dir);

}  // namespace emcc
