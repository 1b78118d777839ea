#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "emcc/bitvec.hpp"
#include "emcc/mcc.hpp"

namespace emcc {

/// Identifier of the seeded index generator stored in template headers.
/// Version 1: ChaCha20 keystream (libsodium randombytes_buf_deterministic)
/// keyed by BLAKE2b("emcc/reindex/v1" || seed_le64), rejection-sampled u32
/// draws, partial Fisher-Yates over [0, L_c) truncated to l.
inline constexpr std::uint8_t kIndexGeneratorV1 = 1;

/// Revocation key: fully determines the re-index set and the transform.
struct TransformKey {
    std::uint64_t seed = 0;
    std::uint16_t p_num = 1;  // length fraction p = p_num / p_den, in [1/2, 1]
    std::uint16_t p_den = 1;
    std::uint16_t tau_millis = 200;  // encoding threshold in thousandths
    std::uint8_t depth = 2;          // nesting depth, 1..3

    double p() const { return double(p_num) / double(p_den); }
    double tau() const { return tau_millis / 1000.0; }

    /// l = floor(p * L_c) rounded down to a multiple of eight.
    std::size_t selected_length(std::size_t l_c) const;

    /// Two-bit units per cancelable feature: l / 2^(depth + 1).
    std::size_t unit_count(std::size_t l_c) const;

    /// Public identifier of the seed (first 8 bytes of a keyed BLAKE2b hash).
    std::uint64_t seed_id() const;

    void validate() const;
};

std::uint64_t seed_identifier(std::uint64_t seed);

/// Ordered selection of l distinct cell positions. Positions are zero-based
/// into the section-major cell layout.
struct IndexSet {
    std::vector<std::uint32_t> indices;
    std::size_t l_c = 0;

    std::size_t l() const { return indices.size(); }
    std::size_t k() const { return indices.size() / 8; }
};

/// Deterministic for fixed (seed, p, l_c). ParamError if l_c < 16 or l == 0.
IndexSet derive_index_set(const TransformKey& key, std::size_t l_c);

/// Protected per-minutia feature. e_hat holds unit_count two-bit units, unit i
/// occupying bits 2i (high) and 2i + 1 (low); d_hat has one bit per unit.
struct CancelableFeature {
    BitVector e_hat;
    BitVector d_hat;

    std::size_t units() const { return d_hat.size(); }
    friend bool operator==(const CancelableFeature&, const CancelableFeature&) = default;
};

/// c'_i = c[t_i], b'_i = expanded_mask[t_i].
std::pair<std::vector<double>, BitVector> reindex(const CylinderFeature& feature, const IndexSet& idx);

/// Layered pairwise differences of neighbouring values: each output combines
/// 2^depth consecutive inputs, e.g. depth 2 gives (a - b) - (c - d).
std::vector<double> nested_difference(std::span<const double> values, int depth);

/// Each output bit is the OR of 2^depth consecutive input bits.
BitVector fold_mask(const BitVector& bits, int depth);

/// Two-bit code per value: 10 if v/2 >= tau, 01 if v/2 <= -tau, else 00.
BitVector encode(std::span<const double> e, double tau);

/// XOR of neighbouring two-bit units; halves the unit count.
BitVector xor_fold(const BitVector& e_bar);

/// OR of neighbouring bits; halves the length.
BitVector or_fold_pairs(const BitVector& d);

CancelableFeature make_cancelable_feature(const CylinderFeature& feature, const IndexSet& idx,
                                          const TransformKey& key);

/// Transforms every valid cylinder (invalid ones are dropped). Parallel.
std::vector<CancelableFeature> transform_features(std::span<const CylinderFeature> features,
                                                  const IndexSet& idx, const TransformKey& key);

namespace serial {
std::vector<CancelableFeature> transform_features(std::span<const CylinderFeature> features,
                                                  const IndexSet& idx, const TransformKey& key);
}  // namespace serial

}  // namespace emcc
