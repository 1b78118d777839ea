#include "emcc/minutiae.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "emcc/error.hpp"

namespace emcc {
namespace {

constexpr double kThetaSlack = 1e-3;
constexpr double kFullTurnRounding = 1e-4;

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

std::uint32_t parse_u32(std::string_view tok, std::size_t line_no, const char* what) {
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw ParseError(where(line_no) + "expected non-negative integer " + what + ", got '" +
                         std::string(tok) + "'");
    }
    return v;
}

double parse_real(std::string_view tok, std::size_t line_no, const char* what) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ParseError(where(line_no) + "expected real " + what + ", got '" + std::string(tok) + "'");
    }
    return v;
}

void ids_from_stem(MinutiaeRecord& r, std::string_view stem) {
    if (stem.empty()) return;
    const auto us = stem.rfind('_');
    if (us == std::string_view::npos) {
        r.finger_id = std::string(stem);
    } else {
        r.finger_id = std::string(stem.substr(0, us));
        r.impression_id = std::string(stem.substr(us + 1));
    }
}

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool has_space(const std::string& s) {
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) return true;
    }
    return false;
}

std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>((b[at] << 8) | b[at + 1]);
}

std::uint32_t be32(std::span<const std::uint8_t> b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
           (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void put16(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

double normalize_theta(double theta) {
    if (!std::isfinite(theta) || theta < -kThetaSlack || theta > kTwoPi + kThetaSlack) {
        throw RangeError("theta " + shortest(theta) + " outside [0, 2pi] (angles must be radians)");
    }
    // A full turn written to four decimals reads as 6.2832, slightly above 2pi.
    if (theta >= kTwoPi && theta < kTwoPi + kFullTurnRounding) return 0.0;
    double t = std::fmod(theta, kTwoPi);
    if (t < 0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

void validate_record(const MinutiaeRecord& record) {
    if (!record.has_bounds()) return;
    for (std::size_t i = 0; i < record.minutiae.size(); ++i) {
        const auto& m = record.minutiae[i];
        if (m.x >= *record.image_width || m.y >= *record.image_height) {
            throw RangeError("minutia " + std::to_string(i) + " at (" + std::to_string(m.x) + ", " +
                             std::to_string(m.y) + ") outside image " +
                             std::to_string(*record.image_width) + "x" +
                             std::to_string(*record.image_height));
        }
    }
}

ParsedRecord parse_minutiae_text(std::string_view text, std::string_view fallback_stem) {
    MinutiaeRecord r;
    bool have_ids = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = split_ws(line);
        if (tok.empty()) continue;

        if (tok[0].starts_with('@')) {
            if (tok[0] == "@id" && tok.size() == 3) {
                r.finger_id = std::string(tok[1]);
                r.impression_id = std::string(tok[2]);
                have_ids = true;
            } else if (tok[0] == "@image" && tok.size() == 3) {
                r.image_width = parse_u32(tok[1], line_no, "width");
                r.image_height = parse_u32(tok[2], line_no, "height");
            } else if (tok[0] == "@dpi" && tok.size() == 2) {
                r.dpi = parse_u32(tok[1], line_no, "dpi");
            } else {
                throw ParseError(where(line_no) + "malformed directive '" + std::string(line) + "'");
            }
            continue;
        }

        if (tok.size() < 3 || tok.size() > 4) {
            throw ParseError(where(line_no) + "expected 'x y theta [quality]'");
        }
        Minutia m;
        m.x = parse_u32(tok[0], line_no, "x");
        m.y = parse_u32(tok[1], line_no, "y");
        try {
            m.theta = normalize_theta(parse_real(tok[2], line_no, "theta"));
        } catch (const RangeError& e) {
            throw RangeError(where(line_no) + e.what());
        }
        if (tok.size() == 4) {
            const double q = parse_real(tok[3], line_no, "quality");
            if (q < 0.0 || q > 1.0) throw RangeError(where(line_no) + "quality outside [0, 1]");
            m.quality = q;
        }
        r.minutiae.push_back(m);
    }
    if (!have_ids) ids_from_stem(r, fallback_stem);
    validate_record(r);
    ParsedRecord out{std::move(r), false};
    out.empty = out.record.minutiae.empty();
    return out;
}

ParsedRecord parse_minutiae_iso(std::span<const std::uint8_t> b, std::string_view fallback_stem) {
    constexpr std::size_t kHeader = 24;
    if (b.size() < kHeader) throw ParseError("iso record shorter than its 24-byte header");
    if (b[0] != 'F' || b[1] != 'M' || b[2] != 'R' || b[3] != 0) throw ParseError("iso record: bad format id");
    if (b[4] != ' ' || b[5] != '2' || b[6] != '0' || b[7] != 0) throw ParseError("iso record: unsupported version");
    const std::uint32_t total = be32(b, 8);
    if (total < kHeader || total > b.size()) throw ParseError("iso record: length field inconsistent with data");
    b = b.first(total);

    MinutiaeRecord r;
    // Zero width or height means the size was not recorded.
    if (const auto w = be16(b, 14), h = be16(b, 16); w != 0 && h != 0) {
        r.image_width = w;
        r.image_height = h;
    }
    if (const auto xres = be16(b, 18); xres != 0) {
        r.dpi = static_cast<std::uint32_t>(std::lround(xres * 2.54));
    }
    const std::uint8_t views = b[22];

    if (views > 0) {
        if (b.size() < kHeader + 4) throw ParseError("iso record: truncated finger view header");
        const std::size_t n = b[kHeader + 3];
        const std::size_t start = kHeader + 4;
        if (b.size() < start + 6 * n) throw ParseError("iso record: truncated minutiae block");
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t at = start + 6 * i;
            Minutia m;
            m.x = be16(b, at) & 0x3fffu;
            m.y = be16(b, at + 2) & 0x3fffu;
            m.theta = normalize_theta(b[at + 4] * (kTwoPi / 256.0));
            if (const auto q = b[at + 5]; q != 0) {
                if (q > 100) throw RangeError("iso record: minutia quality above 100");
                m.quality = q / 100.0;
            }
            r.minutiae.push_back(m);
        }
    }
    ids_from_stem(r, fallback_stem);
    validate_record(r);
    ParsedRecord out{std::move(r), false};
    out.empty = out.record.minutiae.empty();
    return out;
}

ParsedRecord parse_minutiae_file(const std::filesystem::path& path, MinutiaeFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string stem = path.stem().string();
    try {
        if (format == MinutiaeFormat::IsoLikeBinary) {
            const auto* p = reinterpret_cast<const std::uint8_t*>(data.data());
            return parse_minutiae_iso({p, data.size()}, stem);
        }
        return parse_minutiae_text(data, stem);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    } catch (const RangeError& e) {
        throw RangeError(path.string() + ": " + e.what());
    }
}

std::string format_minutiae_text(const MinutiaeRecord& record) {
    if (has_space(record.finger_id) || has_space(record.impression_id)) {
        throw FormatError("record ids must not contain whitespace");
    }
    std::ostringstream os;
    if (!record.finger_id.empty() || !record.impression_id.empty()) {
        if (record.finger_id.empty() || record.impression_id.empty()) {
            throw FormatError("record ids must both be set or both be empty");
        }
        os << "@id " << record.finger_id << ' ' << record.impression_id << '\n';
    }
    if (record.has_bounds()) os << "@image " << *record.image_width << ' ' << *record.image_height << '\n';
    if (record.dpi) os << "@dpi " << *record.dpi << '\n';
    for (const auto& m : record.minutiae) {
        os << m.x << ' ' << m.y << ' ' << shortest(m.theta);
        if (m.quality) os << ' ' << shortest(*m.quality);
        os << '\n';
    }
    return os.str();
}

std::vector<std::uint8_t> format_minutiae_iso(const MinutiaeRecord& record) {
    if (record.minutiae.size() > 255) throw RangeError("iso record holds at most 255 minutiae");
    std::vector<std::uint8_t> out = {'F', 'M', 'R', 0, ' ', '2', '0', 0};
    const std::uint32_t total = 24 + 4 + 6 * static_cast<std::uint32_t>(record.minutiae.size()) + 2;
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(total >> s));
    put16(out, 0);  // capture equipment
    put16(out, record.image_width.value_or(0));
    put16(out, record.image_height.value_or(0));
    const auto res = record.dpi ? static_cast<std::uint32_t>(std::lround(*record.dpi / 2.54)) : 0u;
    put16(out, res);
    put16(out, res);
    out.push_back(1);  // finger views
    out.push_back(0);
    out.push_back(0);  // finger position
    out.push_back(0);
    out.push_back(100);
    out.push_back(static_cast<std::uint8_t>(record.minutiae.size()));
    for (const auto& m : record.minutiae) {
        if (m.x > 0x3fff || m.y > 0x3fff) throw RangeError("iso coordinates are limited to 14 bits");
        put16(out, m.x);
        put16(out, m.y);
        out.push_back(static_cast<std::uint8_t>(std::lround(m.theta * 256.0 / kTwoPi) & 0xff));
        out.push_back(m.quality ? static_cast<std::uint8_t>(std::lround(*m.quality * 100.0)) : 0);
    }
    put16(out, 0);  // no extended data
    return out;
}

void write_minutiae_file(const MinutiaeRecord& record, const std::filesystem::path& path) {
    const std::string text = format_minutiae_text(record);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string dataset_file_name(const MinutiaeRecord& record) {
    return record.finger_id + "_" + record.impression_id + ".min";
}

}  // namespace emcc
