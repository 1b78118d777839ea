#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "emcc/transform.hpp"

namespace emcc {

inline constexpr std::uint8_t kTemplateVersion = 1;
inline constexpr std::size_t kTemplateHeaderBytes = 32;

/// Template file layout (all integers big-endian):
///
///   offset  size  field
///        0     4  magic "EMCC"
///        4     1  format version
///        5     2  units per feature (k for depth 2)
///        7     2  p numerator
///        9     2  p denominator
///       11     1  nesting depth
///       12     2  tau in thousandths
///       14     8  seed identifier
///       22     1  index generator identifier
///       23     4  feature count n
///       27     5  reserved, zero
///
/// followed by the payload: for each feature its 2k value bits then its k
/// validity bits, all features concatenated into one MSB-first bit stream and
/// zero-padded to a whole byte.
struct TemplateHeader {
    std::uint8_t version = kTemplateVersion;
    std::uint16_t units = 0;
    std::uint16_t p_num = 1;
    std::uint16_t p_den = 1;
    std::uint8_t depth = 2;
    std::uint16_t tau_millis = 200;
    std::uint64_t seed_id = 0;
    std::uint8_t generator_id = kIndexGeneratorV1;
    std::uint32_t feature_count = 0;

    friend bool operator==(const TemplateHeader&, const TemplateHeader&) = default;
};

struct CancelableTemplate {
    TemplateHeader header;
    std::vector<CancelableFeature> features;

    std::size_t payload_bits() const { return features.size() * 3 * header.units; }

    friend bool operator==(const CancelableTemplate&, const CancelableTemplate&) = default;
};

/// Header describing templates produced under `key` for cylinders of l_c cells.
TemplateHeader make_header(const TransformKey& key, std::size_t l_c, std::size_t feature_count);

/// Throws KeyMismatch unless both headers describe the same key family
/// (units, p, depth, tau, seed identifier, generator).
void require_same_family(const TemplateHeader& a, const TemplateHeader& b);

std::vector<std::uint8_t> serialize_template(const CancelableTemplate& t);

/// Inverse of serialize_template. Throws MagicError, VersionError,
/// TruncationError (short payload) or FormatError (trailing bytes, bad fields).
CancelableTemplate deserialize_template(std::span<const std::uint8_t> bytes);

void write_template_file(const CancelableTemplate& t, const std::filesystem::path& path);
CancelableTemplate read_template_file(const std::filesystem::path& path);

}  // namespace emcc
