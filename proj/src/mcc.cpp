#include "emcc/mcc.hpp"

#include <cmath>

#include "emcc/error.hpp"

namespace emcc {
namespace {

constexpr double kPi = kTwoPi / 2.0;

// Signed angular difference a - b wrapped to [-pi, pi).
double angle_diff(double a, double b) {
    double d = a - b;
    while (d < -kPi) d += kTwoPi;
    while (d >= kPi) d -= kTwoPi;
    return d;
}

struct Neighbour {
    double x, y;
    double dphi;  // orientation of the centre minutia minus the neighbour's
};

CylinderFeature build_one(const MinutiaeRecord& record, const MccParams& p, std::size_t idx) {
    const auto& ms = record.minutiae;
    const Minutia& m = ms[idx];
    const std::size_t lb = p.base_count();
    const double mx = m.x, my = m.y;

    CylinderFeature f;
    f.center = m;
    f.cell_values.assign(p.cell_count(), 0.0);
    f.base_mask = BitVector(lb);

    const double reach = p.radius + 3.0 * p.sigma_s;
    const double support2 = 9.0 * p.sigma_s * p.sigma_s;
    std::vector<Neighbour> nbrs;
    std::size_t within_radius = 0;
    for (std::size_t t = 0; t < ms.size(); ++t) {
        if (t == idx) continue;
        const double dx = double(ms[t].x) - mx, dy = double(ms[t].y) - my;
        const double d = std::hypot(dx, dy);
        if (d <= p.radius) ++within_radius;
        if (d <= reach) nbrs.push_back({double(ms[t].x), double(ms[t].y), angle_diff(m.theta, ms[t].theta)});
    }
    f.valid = within_radius >= p.min_contributing_minutiae;

    const double delta_s = 2.0 * p.radius / double(p.n_s);
    const double delta_d = kTwoPi / double(p.n_d);
    const double gs_norm = 1.0 / (p.sigma_s * std::sqrt(kTwoPi));
    const double erf_scale = 1.0 / (p.sigma_d * std::sqrt(2.0));
    const double c = std::cos(m.theta), s = std::sin(m.theta);
    const double half = (double(p.n_s) - 1.0) / 2.0;

    // Directional term per (neighbour, section): area of the orientation
    // Gaussian over the section's angular width.
    std::vector<double> gdir(nbrs.size() * p.n_d);
    for (std::size_t t = 0; t < nbrs.size(); ++t) {
        for (std::size_t k = 0; k < p.n_d; ++k) {
            const double phi = -kPi + (double(k) + 0.5) * delta_d;
            const double a = angle_diff(phi, nbrs[t].dphi);
            gdir[t * p.n_d + k] =
                0.5 * (std::erf((a + delta_d / 2.0) * erf_scale) - std::erf((a - delta_d / 2.0) * erf_scale));
        }
    }

    std::vector<double> sums(p.n_d);
    for (std::size_t i = 0; i < p.n_s; ++i) {
        for (std::size_t j = 0; j < p.n_s; ++j) {
            const double u = (double(i) - half) * delta_s;
            const double v = (double(j) - half) * delta_s;
            const double cx = mx + c * u - s * v;
            const double cy = my + s * u + c * v;
            if (std::hypot(cx - mx, cy - my) > p.radius) continue;
            if (record.has_bounds() &&
                (cx < 0.0 || cy < 0.0 || cx >= double(*record.image_width) || cy >= double(*record.image_height))) {
                continue;
            }
            const std::size_t cell = i * p.n_s + j;
            f.base_mask.set(cell);

            std::fill(sums.begin(), sums.end(), 0.0);
            for (std::size_t t = 0; t < nbrs.size(); ++t) {
                const double dx = nbrs[t].x - cx, dy = nbrs[t].y - cy;
                const double d2 = dx * dx + dy * dy;
                if (d2 > support2) continue;
                const double gs = gs_norm * std::exp(-d2 / (2.0 * p.sigma_s * p.sigma_s));
                for (std::size_t k = 0; k < p.n_d; ++k) sums[k] += gs * gdir[t * p.n_d + k];
            }
            for (std::size_t k = 0; k < p.n_d; ++k) {
                f.cell_values[k * lb + cell] = 1.0 / (1.0 + std::exp(-p.psi_tau * (sums[k] - p.psi_mu)));
            }
        }
    }
    return f;
}

}  // namespace

void MccParams::validate() const {
    if (n_s < 2) throw ParamError("n_s must be at least 2");
    if (n_d < 1) throw ParamError("n_d must be at least 1");
    if (!(radius > 0.0) || !(sigma_s > 0.0) || !(sigma_d > 0.0)) {
        throw ParamError("radius, sigma_s and sigma_d must be positive");
    }
    if (!(psi_tau > 0.0)) throw ParamError("psi_tau must be positive");
}

BitVector expand_mask(const BitVector& base_mask, std::size_t n_d) {
    if (base_mask.empty()) throw LengthError("base mask is empty");
    const std::size_t lb = base_mask.size();
    BitVector out(lb * n_d);
    for (std::size_t s = 0; s < n_d; ++s) {
        for (std::size_t i = 0; i < lb; ++i) {
            if (base_mask.get(i)) out.set(s * lb + i);
        }
    }
    return out;
}

std::vector<CylinderFeature> build_cylinders(const MinutiaeRecord& record, const MccParams& params) {
    params.validate();
    const auto n = static_cast<std::ptrdiff_t>(record.minutiae.size());
    std::vector<CylinderFeature> out(record.minutiae.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = build_one(record, params, static_cast<std::size_t>(i));
    }
    return out;
}

std::vector<CylinderFeature> valid_cylinders(std::vector<CylinderFeature> features) {
    std::erase_if(features, [](const CylinderFeature& f) { return !f.valid; });
    return features;
}

namespace serial {

std::vector<CylinderFeature> build_cylinders(const MinutiaeRecord& record, const MccParams& params) {
    params.validate();
    std::vector<CylinderFeature> out;
    out.reserve(record.minutiae.size());
    for (std::size_t i = 0; i < record.minutiae.size(); ++i) out.push_back(build_one(record, params, i));
    return out;
}

}  // namespace serial
}  // namespace emcc
