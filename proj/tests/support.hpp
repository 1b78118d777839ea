#pragma once

// Random inputs shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "emcc/mcc.hpp"
#include "emcc/minutiae.hpp"
#include "emcc/transform.hpp"

namespace emcc::fixtures {

inline MinutiaeRecord random_record(std::mt19937_64& rng, std::size_t n, std::uint32_t w = 388,
                                    std::uint32_t h = 374, bool bounds = true) {
    std::uniform_int_distribution<std::uint32_t> xs(0, w - 1), ys(0, h - 1);
    std::uniform_real_distribution<double> th(0.0, kTwoPi);
    MinutiaeRecord r;
    r.finger_id = "1";
    r.impression_id = "1";
    if (bounds) {
        r.image_width = w;
        r.image_height = h;
    }
    for (std::size_t i = 0; i < n; ++i) r.minutiae.push_back({xs(rng), ys(rng), th(rng), {}});
    return r;
}

// Cylinder with arbitrary cell values. When `quantized` is set the values are
// multiples of 0.05 so nested differences hit encoding thresholds exactly.
inline CylinderFeature random_cylinder(std::mt19937_64& rng, const MccParams& p = {}, bool quantized = false,
                                       double mask_density = 0.7) {
    CylinderFeature f;
    f.valid = true;
    f.cell_values.resize(p.cell_count());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> q(0, 20);
    for (auto& v : f.cell_values) v = quantized ? q(rng) * 0.05 : u(rng);
    f.base_mask = BitVector(p.base_count());
    for (std::size_t i = 0; i < p.base_count(); ++i) f.base_mask.set(i, u(rng) < mask_density);
    return f;
}

inline CancelableFeature random_cancelable(std::mt19937_64& rng, std::size_t units, double mask_density = 0.8) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CancelableFeature f{BitVector(2 * units), BitVector(units)};
    for (std::size_t i = 0; i < units; ++i) {
        const double r = u(rng);
        // Rough eMCC code mix: mostly 00, the rest split over 01/10/11.
        if (r > 0.6) f.e_hat.set(2 * i, true);
        if (r > 0.3 && r < 0.75) f.e_hat.set(2 * i + 1, true);
        f.d_hat.set(i, u(rng) < mask_density);
    }
    return f;
}

inline std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n, double mean, double spread,
                                         bool quantize) {
    std::normal_distribution<double> d(mean, spread);
    std::vector<double> s(n);
    for (auto& v : s) {
        v = std::clamp(d(rng), 0.0, 1.0);
        if (quantize) v = std::round(v * 50.0) / 50.0;
    }
    return s;
}

}  // namespace emcc::fixtures
