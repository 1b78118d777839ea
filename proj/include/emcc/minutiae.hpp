#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace emcc {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// One extracted minutia. Coordinates are pixels, theta is radians in [0, 2pi).
struct Minutia {
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    double theta = 0.0;
    std::optional<double> quality;

    friend bool operator==(const Minutia&, const Minutia&) = default;
};

/// A fingerprint impression's minutiae plus provenance. (finger_id,
/// impression_id) identifies a record within a dataset.
struct MinutiaeRecord {
    std::string finger_id;
    std::string impression_id;
    std::optional<std::uint32_t> image_width;
    std::optional<std::uint32_t> image_height;
    std::optional<std::uint32_t> dpi;
    std::vector<Minutia> minutiae;

    bool has_bounds() const { return image_width.has_value() && image_height.has_value(); }

    friend bool operator==(const MinutiaeRecord&, const MinutiaeRecord&) = default;
};

enum class MinutiaeFormat { PlainText, IsoLikeBinary };

struct ParsedRecord {
    MinutiaeRecord record;
    bool empty = false;  // surfaced, not thrown
};

/// Maps an angle in radians onto [0, 2pi). Values within 1e-3 rad outside
/// [0, 2pi] are wrapped; anything further away is a RangeError, which is how
/// angles given in degrees get rejected.
double normalize_theta(double theta);

/// Throws RangeError if any minutia lies outside the declared image bounds.
void validate_record(const MinutiaeRecord& record);

/// Plain-text minutiae format:
///
///     # comment
///     @id <finger_id> <impression_id>
///     @image <width> <height>
///     @dpi <dpi>
///     <x> <y> <theta> [<quality>]
///
/// One minutia per line, whitespace separated, theta in radians. Directive
/// lines are optional. When @id is absent the ids are taken from a
/// file stem of the form <finger_id>_<impression_id>.
ParsedRecord parse_minutiae_text(std::string_view text, std::string_view fallback_stem = {});

/// ISO/IEC 19794-2:2005 style record: "FMR\0" " 20\0", 4-byte length, 24-byte
/// header, finger views of 6-byte minutiae with 14-bit coordinates and
/// 256-step angles. Only the first finger view is read.
ParsedRecord parse_minutiae_iso(std::span<const std::uint8_t> bytes, std::string_view fallback_stem = {});

ParsedRecord parse_minutiae_file(const std::filesystem::path& path,
                                 MinutiaeFormat format = MinutiaeFormat::PlainText);

std::string format_minutiae_text(const MinutiaeRecord& record);
std::vector<std::uint8_t> format_minutiae_iso(const MinutiaeRecord& record);

void write_minutiae_file(const MinutiaeRecord& record, const std::filesystem::path& path);

/// "<finger_id>_<impression_id>.min"
std::string dataset_file_name(const MinutiaeRecord& record);

}  // namespace emcc
