#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "emcc/bitvec.hpp"
#include "emcc/minutiae.hpp"

namespace emcc {

/// Cylinder discretisation. L_c = n_s * n_s * n_d cells, L_b = n_s * n_s.
struct MccParams {
    std::size_t n_s = 16;
    std::size_t n_d = 5;
    double radius = 70.0;
    double sigma_s = 28.0 / 3.0;
    double sigma_d = kTwoPi / 9.0;
    std::size_t min_contributing_minutiae = 2;
    // Logistic squashing of the raw cell sum onto [0, 1].
    double psi_mu = 0.005;
    double psi_tau = 400.0;

    std::size_t cell_count() const { return n_s * n_s * n_d; }   // L_c
    std::size_t base_count() const { return n_s * n_s; }         // L_b

    /// Throws ParamError when a field is out of range.
    void validate() const;
};

/// Per-minutia cylinder. Cells are linearised section-major:
/// index = s * L_b + i * n_s + j for angular section s and grid cell (i, j).
struct CylinderFeature {
    std::vector<double> cell_values;  // L_c values in [0, 1]
    BitVector base_mask;              // L_b bits, one per grid cell
    Minutia center;
    bool valid = false;

    std::size_t n_d() const { return base_mask.empty() ? 0 : cell_values.size() / base_mask.size(); }
};

/// Replicates the base mask once per angular section (section-major), giving
/// one validity bit per cell. Throws LengthError if the mask is empty.
BitVector expand_mask(const BitVector& base_mask, std::size_t n_d);

/// Builds one cylinder per minutia, in input order. Cylinders whose minutia
/// has fewer than min_contributing_minutiae neighbours within the radius come
/// back with valid = false. Parallel over minutiae.
std::vector<CylinderFeature> build_cylinders(const MinutiaeRecord& record, const MccParams& params);

/// Drops invalid cylinders.
std::vector<CylinderFeature> valid_cylinders(std::vector<CylinderFeature> features);

namespace serial {
/// Single-threaded reference for build_cylinders; results are bit-identical.
std::vector<CylinderFeature> build_cylinders(const MinutiaeRecord& record, const MccParams& params);
}  // namespace serial

}  // namespace emcc
