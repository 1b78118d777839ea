#include "emcc/template.hpp"

#include <fstream>
#include <iterator>
#include <limits>

#include "emcc/error.hpp"

namespace emcc {
namespace {

class BitWriter {
public:
    explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}
    void put(bool bit) {
        if (fill_ == 0) out_.push_back(0);
        if (bit) out_.back() |= static_cast<std::uint8_t>(0x80u >> fill_);
        fill_ = (fill_ + 1) & 7;
    }
    void put(const BitVector& v) {
        for (std::size_t i = 0; i < v.size(); ++i) put(v.get(i));
    }

private:
    std::vector<std::uint8_t>& out_;
    unsigned fill_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}
    bool get() {
        const bool bit = (in_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
        ++pos_;
        return bit;
    }
    BitVector get(std::size_t n) {
        BitVector v(n);
        for (std::size_t i = 0; i < n; ++i) v.set(i, get());
        return v;
    }
    std::size_t position() const { return pos_; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

template <class T>
void put_be(std::vector<std::uint8_t>& out, T v) {
    for (int s = int(sizeof(T)) * 8 - 8; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

template <class T>
T get_be(std::span<const std::uint8_t> in, std::size_t at) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v = static_cast<T>((v << 8) | in[at + i]);
    return v;
}

constexpr std::uint8_t kMagic[4] = {'E', 'M', 'C', 'C'};

}  // namespace

TemplateHeader make_header(const TransformKey& key, std::size_t l_c, std::size_t feature_count) {
    key.validate();
    TemplateHeader h;
    const std::size_t units = key.unit_count(l_c);
    if (units > std::numeric_limits<std::uint16_t>::max()) throw ParamError("unit count exceeds header field");
    h.units = static_cast<std::uint16_t>(units);
    h.p_num = key.p_num;
    h.p_den = key.p_den;
    h.depth = key.depth;
    h.tau_millis = key.tau_millis;
    h.seed_id = key.seed_id();
    h.generator_id = kIndexGeneratorV1;
    h.feature_count = static_cast<std::uint32_t>(feature_count);
    return h;
}

void require_same_family(const TemplateHeader& a, const TemplateHeader& b) {
    if (a.units != b.units) {
        throw KeyMismatch("unit count differs (" + std::to_string(a.units) + " vs " + std::to_string(b.units) + ")");
    }
    if (a.seed_id != b.seed_id || a.generator_id != b.generator_id) {
        throw KeyMismatch("templates were produced under different seeds");
    }
    if (a.p_num * b.p_den != b.p_num * a.p_den || a.depth != b.depth || a.tau_millis != b.tau_millis) {
        throw KeyMismatch("templates were produced under different transform parameters");
    }
}

std::vector<std::uint8_t> serialize_template(const CancelableTemplate& t) {
    const auto& h = t.header;
    if (h.feature_count != t.features.size()) throw FormatError("header feature count does not match features");
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    out.reserve(kTemplateHeaderBytes + (t.payload_bits() + 7) / 8);
    out.push_back(h.version);
    put_be(out, h.units);
    put_be(out, h.p_num);
    put_be(out, h.p_den);
    out.push_back(h.depth);
    put_be(out, h.tau_millis);
    put_be(out, h.seed_id);
    out.push_back(h.generator_id);
    put_be(out, h.feature_count);
    out.resize(kTemplateHeaderBytes, 0);

    BitWriter w(out);
    for (const auto& f : t.features) {
        if (f.e_hat.size() != 2u * h.units || f.d_hat.size() != h.units) {
            throw FormatError("feature size does not match header unit count");
        }
        w.put(f.e_hat);
        w.put(f.d_hat);
    }
    return out;
}

CancelableTemplate deserialize_template(std::span<const std::uint8_t> bytes) {
    for (std::size_t i = 0; i < 4 && i < bytes.size(); ++i) {
        if (bytes[i] != kMagic[i]) throw MagicError("not an EMCC template (bad magic)");
    }
    if (bytes.size() < kTemplateHeaderBytes) throw TruncationError("template shorter than its header");
    if (bytes[4] != kTemplateVersion) throw VersionError("unsupported template version " + std::to_string(bytes[4]));

    CancelableTemplate t;
    auto& h = t.header;
    h.version = bytes[4];
    h.units = get_be<std::uint16_t>(bytes, 5);
    h.p_num = get_be<std::uint16_t>(bytes, 7);
    h.p_den = get_be<std::uint16_t>(bytes, 9);
    h.depth = bytes[11];
    h.tau_millis = get_be<std::uint16_t>(bytes, 12);
    h.seed_id = get_be<std::uint64_t>(bytes, 14);
    h.generator_id = bytes[22];
    h.feature_count = get_be<std::uint32_t>(bytes, 23);
    for (std::size_t i = 27; i < kTemplateHeaderBytes; ++i) {
        if (bytes[i] != 0) throw FormatError("reserved header bytes must be zero");
    }
    if (h.depth < 1 || h.depth > 3) throw FormatError("invalid nesting depth in header");
    if (h.generator_id != kIndexGeneratorV1) throw FormatError("unknown index generator");
    if (h.p_den == 0 || h.p_num > h.p_den || 2u * h.p_num < h.p_den) throw FormatError("invalid p in header");
    if (h.feature_count > 0 && h.units == 0) throw FormatError("zero units per feature");

    const auto payload = bytes.subspan(kTemplateHeaderBytes);
    const std::uint64_t bits = std::uint64_t{h.feature_count} * 3u * h.units;
    const std::uint64_t need = (bits + 7) / 8;
    if (payload.size() < need) {
        throw TruncationError("payload has " + std::to_string(payload.size()) + " bytes, header requires " +
                              std::to_string(need));
    }
    if (payload.size() > need) throw FormatError("trailing bytes after payload");

    BitReader r(payload);
    t.features.reserve(h.feature_count);
    for (std::uint32_t i = 0; i < h.feature_count; ++i) {
        CancelableFeature f;
        f.e_hat = r.get(2u * h.units);
        f.d_hat = r.get(h.units);
        t.features.push_back(std::move(f));
    }
    while (r.position() < need * 8) {
        if (r.get()) throw FormatError("non-zero padding bits");
    }
    return t;
}

void write_template_file(const CancelableTemplate& t, const std::filesystem::path& path) {
    const auto bytes = serialize_template(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

CancelableTemplate read_template_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_template(bytes);
}

}  // namespace emcc
