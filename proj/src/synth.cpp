#include "emcc/synth.hpp"

#include <cmath>
#include <random>

#include "emcc/error.hpp"

namespace emcc {
namespace {

// std::*_distribution output is implementation-defined; these are not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * double(n)); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

struct Point {
    double x, y, theta;
};

double wrap(double t) {
    t = std::fmod(t, kTwoPi);
    if (t < 0) t += kTwoPi;
    return t >= kTwoPi ? 0.0 : t;
}

std::vector<Point> base_minutiae(const SynthParams& p, Rng& rng) {
    const std::size_t n = p.min_minutiae + rng.below(p.max_minutiae - p.min_minutiae + 1);
    std::vector<Point> pts;
    const double min2 = p.min_spacing_px * p.min_spacing_px;
    std::size_t attempts = 0;
    while (pts.size() < n && attempts < 100 * n) {
        ++attempts;
        const Point c{rng.uniform(0.0, double(p.canvas_width)), rng.uniform(0.0, double(p.canvas_height)),
                      rng.uniform(0.0, kTwoPi)};
        bool ok = true;
        for (const auto& q : pts) {
            const double dx = q.x - c.x, dy = q.y - c.y;
            if (dx * dx + dy * dy < min2) {
                ok = false;
                break;
            }
        }
        if (ok) pts.push_back(c);
    }
    return pts;
}

MinutiaeRecord impression(const SynthParams& p, const std::vector<Point>& base, Rng& rng, std::size_t finger,
                          std::size_t imp) {
    const NoiseModel& nz = p.noise;
    const double alpha = rng.uniform(-nz.rotation_deg, nz.rotation_deg) * kTwoPi / 360.0;
    const double tx = rng.uniform(-nz.translation_px, nz.translation_px);
    const double ty = rng.uniform(-nz.translation_px, nz.translation_px);
    const double cx = p.canvas_width / 2.0, cy = p.canvas_height / 2.0;
    const double ca = std::cos(alpha), sa = std::sin(alpha);

    MinutiaeRecord r;
    r.finger_id = std::to_string(finger + 1);
    r.impression_id = std::to_string(imp + 1);
    r.image_width = p.canvas_width;
    r.image_height = p.canvas_height;
    r.dpi = p.dpi;

    auto emit = [&](double x, double y, double theta) {
        const double rx = std::round(x), ry = std::round(y);
        if (rx < 0 || ry < 0 || rx >= p.canvas_width || ry >= p.canvas_height) return;
        r.minutiae.push_back({static_cast<std::uint32_t>(rx), static_cast<std::uint32_t>(ry), wrap(theta), {}});
    };

    for (const auto& b : base) {
        const bool drop = rng.uniform() < nz.drop_rate;
        const double jx = nz.jitter_px * rng.normal();
        const double jy = nz.jitter_px * rng.normal();
        const double jt = nz.jitter_theta * rng.normal();
        const bool spurious = rng.uniform() < nz.spurious_rate;
        const Point s{rng.uniform(0.0, double(p.canvas_width)), rng.uniform(0.0, double(p.canvas_height)),
                      rng.uniform(0.0, kTwoPi)};
        if (!drop) {
            const double dx = b.x - cx, dy = b.y - cy;
            emit(cx + ca * dx - sa * dy + tx + jx, cy + sa * dx + ca * dy + ty + jy, b.theta + alpha + jt);
        }
        if (spurious) emit(s.x, s.y, s.theta);
    }
    return r;
}

}  // namespace

void SynthParams::validate() const {
    if (fingers < 1 || impressions < 1) throw ParamError("fingers and impressions must be at least 1");
    if (min_minutiae > max_minutiae) throw ParamError("min_minutiae exceeds max_minutiae");
    if (canvas_width == 0 || canvas_height == 0) throw ParamError("canvas must be non-empty");
    const auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
    if (!rate_ok(noise.drop_rate) || !rate_ok(noise.spurious_rate)) throw ParamError("noise rates must lie in [0, 1]");
    if (noise.rotation_deg < 0 || noise.translation_px < 0 || noise.jitter_px < 0 || noise.jitter_theta < 0) {
        throw ParamError("noise magnitudes must be non-negative");
    }
}

std::vector<MinutiaeRecord> synth_records(const SynthParams& params) {
    params.validate();
    Rng rng(params.seed);
    std::vector<MinutiaeRecord> out;
    out.reserve(params.fingers * params.impressions);
    for (std::size_t f = 0; f < params.fingers; ++f) {
        const auto base = base_minutiae(params, rng);
        for (std::size_t i = 0; i < params.impressions; ++i) out.push_back(impression(params, base, rng, f, i));
    }
    return out;
}

void synth_dataset(const SynthParams& params, const std::filesystem::path& dir) {
    const auto records = synth_records(params);
    std::filesystem::create_directories(dir);
    for (const auto& r : records) write_minutiae_file(r, dir / dataset_file_name(r));
}

}  // namespace emcc
