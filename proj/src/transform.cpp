#include "emcc/transform.hpp"

#include <sodium.h>

#include <array>
#include <numeric>
#include <string_view>

#include "emcc/error.hpp"
#include "emcc/transform_debug.hpp"

namespace emcc {
namespace {

std::array<unsigned char, 8> le64(std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    return b;
}

void ensure_sodium() {
    static const bool ok = sodium_init() >= 0;
    if (!ok) throw Error("libsodium initialisation failed");
}

// Unbiased bounded draws from a deterministic ChaCha20 keystream. The stream
// is a prefix-stable function of the key, so growing the buffer never changes
// values already consumed.
class KeyedStream {
public:
    explicit KeyedStream(std::uint64_t seed) {
        ensure_sodium();
        constexpr std::string_view domain = "emcc/reindex/v1";
        const auto s = le64(seed);
        crypto_generichash_state st;
        crypto_generichash_init(&st, nullptr, 0, key_.size());
        crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(domain.data()), domain.size());
        crypto_generichash_update(&st, s.data(), s.size());
        crypto_generichash_final(&st, key_.data(), key_.size());
    }

    std::uint32_t below(std::uint32_t bound) {
        const std::uint32_t reject_below = static_cast<std::uint32_t>(-bound) % bound;
        for (;;) {
            const std::uint32_t x = next();
            if (x >= reject_below) return x % bound;
        }
    }

private:
    std::uint32_t next() {
        if (pos_ + 4 > buf_.size()) {
            buf_.resize(buf_.empty() ? 16384 : buf_.size() * 2);
            randombytes_buf_deterministic(buf_.data(), buf_.size(), key_.data());
        }
        const std::uint32_t x = std::uint32_t{buf_[pos_]} | (std::uint32_t{buf_[pos_ + 1]} << 8) |
                                (std::uint32_t{buf_[pos_ + 2]} << 16) | (std::uint32_t{buf_[pos_ + 3]} << 24);
        pos_ += 4;
        return x;
    }

    std::array<unsigned char, randombytes_SEEDBYTES> key_{};
    std::vector<unsigned char> buf_;
    std::size_t pos_ = 0;
};

void check_depth(int depth) {
    if (depth < 1 || depth > 3) throw ParamError("nesting depth must be 1, 2 or 3");
}

// In-place layered difference over a block of 2^depth values.
double nested_block(double* v, int depth) {
    std::size_t n = std::size_t{1} << depth;
    while (n > 1) {
        n /= 2;
        for (std::size_t i = 0; i < n; ++i) v[i] = v[2 * i] - v[2 * i + 1];
    }
    return v[0];
}

void check_feature(const CylinderFeature& f, const IndexSet& idx) {
    if (!f.valid) throw ParamError("cannot transform an invalid cylinder feature");
    if (f.cell_values.size() != idx.l_c || f.base_mask.empty() || idx.l_c % f.base_mask.size() != 0) {
        throw LengthError("cylinder length " + std::to_string(f.cell_values.size()) +
                          " does not match index set length " + std::to_string(idx.l_c));
    }
}

}  // namespace

std::size_t TransformKey::selected_length(std::size_t l_c) const {
    const std::size_t floor_pl = (std::size_t{p_num} * l_c) / p_den;
    return floor_pl - floor_pl % 8;
}

std::size_t TransformKey::unit_count(std::size_t l_c) const {
    const std::size_t l = selected_length(l_c);
    const std::size_t group = std::size_t{1} << (depth + 1);
    if (l % group != 0) {
        throw ParamError("selected length " + std::to_string(l) + " is not divisible by " +
                         std::to_string(group) + " as depth " + std::to_string(depth) + " requires");
    }
    return l / group;
}

std::uint64_t seed_identifier(std::uint64_t seed) {
    ensure_sodium();
    constexpr std::string_view domain = "emcc/seed-id/v1";
    const auto s = le64(seed);
    std::array<unsigned char, 16> out{};
    crypto_generichash_state st;
    crypto_generichash_init(&st, nullptr, 0, out.size());
    crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(domain.data()), domain.size());
    crypto_generichash_update(&st, s.data(), s.size());
    crypto_generichash_final(&st, out.data(), out.size());
    std::uint64_t id = 0;
    for (int i = 0; i < 8; ++i) id = (id << 8) | out[static_cast<std::size_t>(i)];
    return id;
}

std::uint64_t TransformKey::seed_id() const { return seed_identifier(seed); }

void TransformKey::validate() const {
    if (p_den == 0 || p_num > p_den || 2u * p_num < p_den) throw ParamError("p must lie in [1/2, 1]");
    if (tau_millis == 0 || tau_millis >= 1000) throw ParamError("tau must lie strictly inside (0, 1)");
    check_depth(depth);
}

IndexSet derive_index_set(const TransformKey& key, std::size_t l_c) {
    key.validate();
    if (l_c < 16) throw ParamError("cell count must be at least 16");
    const std::size_t l = key.selected_length(l_c);
    if (l == 0) throw ParamError("selected length is zero");

    std::vector<std::uint32_t> perm(l_c);
    std::iota(perm.begin(), perm.end(), 0u);
    KeyedStream rng(key.seed);
    for (std::size_t i = 0; i < l; ++i) {
        const std::size_t j = i + rng.below(static_cast<std::uint32_t>(l_c - i));
        std::swap(perm[i], perm[j]);
    }
    perm.resize(l);
    return IndexSet{std::move(perm), l_c};
}

std::pair<std::vector<double>, BitVector> reindex(const CylinderFeature& feature, const IndexSet& idx) {
    if (feature.cell_values.size() != idx.l_c || feature.base_mask.empty() ||
        idx.l_c % feature.base_mask.size() != 0) {
        throw LengthError("cylinder length does not match index set");
    }
    const BitVector full = expand_mask(feature.base_mask, idx.l_c / feature.base_mask.size());
    std::vector<double> c(idx.l());
    BitVector b(idx.l());
    for (std::size_t i = 0; i < idx.l(); ++i) {
        c[i] = feature.cell_values[idx.indices[i]];
        b.set(i, full.get(idx.indices[i]));
    }
    return {std::move(c), std::move(b)};
}

std::vector<double> nested_difference(std::span<const double> values, int depth) {
    check_depth(depth);
    const std::size_t block = std::size_t{1} << depth;
    if (values.size() % block != 0) {
        throw LengthError("length " + std::to_string(values.size()) + " not divisible by " + std::to_string(block));
    }
    std::vector<double> out(values.size() / block);
    std::array<double, 8> tmp{};
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(i * block), block, tmp.begin());
        out[i] = nested_block(tmp.data(), depth);
    }
    return out;
}

BitVector fold_mask(const BitVector& bits, int depth) {
    check_depth(depth);
    const std::size_t block = std::size_t{1} << depth;
    if (bits.size() % block != 0) throw LengthError("mask length not divisible by " + std::to_string(block));
    BitVector out(bits.size() / block);
    for (std::size_t i = 0; i < out.size(); ++i) {
        bool any = false;
        for (std::size_t j = 0; j < block; ++j) any = any || bits.get(i * block + j);
        out.set(i, any);
    }
    return out;
}

BitVector encode(std::span<const double> e, double tau) {
    if (!(tau > 0.0)) throw ParamError("tau must be positive");
    BitVector out(2 * e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double half = e[i] / 2.0;
        if (half >= tau) {
            out.set(2 * i);
        } else if (half <= -tau) {
            out.set(2 * i + 1);
        }
    }
    return out;
}

BitVector xor_fold(const BitVector& e_bar) {
    if (e_bar.size() % 4 != 0) throw LengthError("xor folding needs an even number of two-bit units");
    BitVector out(e_bar.size() / 2);
    for (std::size_t i = 0; i < out.size() / 2; ++i) {
        out.set(2 * i, e_bar.get(4 * i) != e_bar.get(4 * i + 2));
        out.set(2 * i + 1, e_bar.get(4 * i + 1) != e_bar.get(4 * i + 3));
    }
    return out;
}

BitVector or_fold_pairs(const BitVector& d) {
    if (d.size() % 2 != 0) throw LengthError("or folding needs an even length");
    BitVector out(d.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) out.set(i, d.get(2 * i) || d.get(2 * i + 1));
    return out;
}

CancelableFeature make_cancelable_feature(const CylinderFeature& feature, const IndexSet& idx,
                                          const TransformKey& key) {
    check_feature(feature, idx);
    check_depth(key.depth);
    const std::size_t half = std::size_t{1} << key.depth;
    const std::size_t group = 2 * half;
    if (idx.l() % group != 0) throw ParamError("index set length incompatible with nesting depth");
    const std::size_t units = idx.l() / group;
    const std::size_t lb = feature.base_mask.size();
    const double tau = key.tau();

    CancelableFeature out{BitVector(2 * units), BitVector(units)};
    std::array<double, 8> a{}, b{};
    for (std::size_t u = 0; u < units; ++u) {
        const std::uint32_t* t = idx.indices.data() + u * group;
        bool valid = false;
        for (std::size_t j = 0; j < half; ++j) {
            a[j] = feature.cell_values[t[j]];
            b[j] = feature.cell_values[t[half + j]];
        }
        for (std::size_t j = 0; j < group; ++j) valid = valid || feature.base_mask.get(t[j] % lb);
        const double ea = nested_block(a.data(), key.depth) / 2.0;
        const double eb = nested_block(b.data(), key.depth) / 2.0;
        const bool hi = (ea >= tau) != (eb >= tau);
        const bool lo = (ea <= -tau) != (eb <= -tau);
        out.e_hat.set(2 * u, hi);
        out.e_hat.set(2 * u + 1, lo);
        out.d_hat.set(u, valid);
    }
    return out;
}

std::vector<CancelableFeature> transform_features(std::span<const CylinderFeature> features,
                                                  const IndexSet& idx, const TransformKey& key) {
    std::vector<const CylinderFeature*> valid;
    for (const auto& f : features) {
        if (f.valid) valid.push_back(&f);
    }
    std::vector<CancelableFeature> out(valid.size());
    const auto n = static_cast<std::ptrdiff_t>(valid.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = make_cancelable_feature(*valid[static_cast<std::size_t>(i)], idx, key);
    }
    return out;
}

namespace serial {

std::vector<CancelableFeature> transform_features(std::span<const CylinderFeature> features,
                                                  const IndexSet& idx, const TransformKey& key) {
    std::vector<CancelableFeature> out;
    for (const auto& f : features) {
        if (!f.valid) continue;
        // Staged path: every intermediate materialised.
        auto stages = debug::pipeline_stages(f, idx, key);
        out.push_back({std::move(stages.e_hat), std::move(stages.d_hat)});
    }
    return out;
}

}  // namespace serial

namespace debug {

PipelineStages pipeline_stages(const CylinderFeature& feature, const IndexSet& idx, const TransformKey& key) {
    check_feature(feature, idx);
    PipelineStages s;
    std::tie(s.c_prime, s.b_prime) = reindex(feature, idx);
    s.e_first = nested_difference(s.c_prime, 1);
    s.e = nested_difference(s.c_prime, key.depth);
    s.d = fold_mask(s.b_prime, key.depth);
    s.e_bar = encode(s.e, key.tau());
    s.e_hat = xor_fold(s.e_bar);
    s.d_hat = or_fold_pairs(s.d);
    return s;
}

}  // namespace debug
}  // namespace emcc
