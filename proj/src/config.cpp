#include "emcc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "emcc/error.hpp"

namespace emcc {
namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <class Fn>
void for_each_entry(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        fn(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no);
    }
}

template <class T>
T parse_number(std::string_view v, std::string_view key) {
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError("bad value '" + std::string(v) + "' for " + std::string(key));
    }
    return out;
}

std::string read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

std::pair<std::uint16_t, std::uint16_t> parse_fraction(std::string_view s) {
    s = trim(s);
    if (const auto slash = s.find('/'); slash != std::string_view::npos) {
        const auto n = parse_number<std::uint16_t>(trim(s.substr(0, slash)), "p");
        const auto d = parse_number<std::uint16_t>(trim(s.substr(slash + 1)), "p");
        if (d == 0) throw ConfigError("p denominator is zero");
        return {n, d};
    }
    const double v = parse_number<double>(s, "p");
    // Decimal p: express in thousandths.
    const auto n = static_cast<long>(std::lround(v * 1000.0));
    if (n < 0 || n > 65535) throw ConfigError("p out of range");
    const long d = 1000, g = std::gcd(n, d);
    return {static_cast<std::uint16_t>(n / g), static_cast<std::uint16_t>(d / g)};
}

void Config::validate() const {
    mcc.validate();
    transform.validate();
    (void)transform.unit_count(mcc.cell_count());
    greedy.validate();
    if (!(match_threshold >= 0.0 && match_threshold <= 1.0)) throw ConfigError("match.threshold must lie in [0, 1]");
}

Config parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    Config c;
    for_each_entry(text, [&](std::string_view k, std::string_view v, std::size_t) {
        if (k == "mcc.n_s") c.mcc.n_s = parse_number<std::size_t>(v, k);
        else if (k == "mcc.n_d") c.mcc.n_d = parse_number<std::size_t>(v, k);
        else if (k == "mcc.radius") c.mcc.radius = parse_number<double>(v, k);
        else if (k == "mcc.sigma_s") c.mcc.sigma_s = parse_number<double>(v, k);
        else if (k == "mcc.sigma_d") c.mcc.sigma_d = parse_number<double>(v, k);
        else if (k == "mcc.min_contributing_minutiae") c.mcc.min_contributing_minutiae = parse_number<std::size_t>(v, k);
        else if (k == "mcc.psi_mu") c.mcc.psi_mu = parse_number<double>(v, k);
        else if (k == "mcc.psi_tau") c.mcc.psi_tau = parse_number<double>(v, k);
        else if (k == "transform.p") std::tie(c.transform.p_num, c.transform.p_den) = parse_fraction(v);
        else if (k == "transform.tau") {
            const double t = parse_number<double>(v, k);
            const long millis = std::lround(t * 1000.0);
            if (millis <= 0 || millis >= 1000) throw ConfigError("transform.tau must lie in (0, 1)");
            c.transform.tau_millis = static_cast<std::uint16_t>(millis);
        } else if (k == "transform.depth") c.transform.depth = parse_number<std::uint8_t>(v, k);
        else if (k == "greedy.min_pairs") c.greedy.min_pairs = parse_number<std::size_t>(v, k);
        else if (k == "greedy.max_pairs") c.greedy.max_pairs = parse_number<std::size_t>(v, k);
        else if (k == "greedy.mu_p") c.greedy.mu_p = parse_number<double>(v, k);
        else if (k == "greedy.tau_p") c.greedy.tau_p = parse_number<double>(v, k);
        else if (k == "match.threshold") c.match_threshold = parse_number<double>(v, k);
        else if (k == "key_file") c.key_file = base_dir / std::filesystem::path(std::string(v));
        else if (k == "dataset.path") c.dataset_path = base_dir / std::filesystem::path(std::string(v));
        else throw ConfigError("unknown config key '" + std::string(k) + "'");
    });
    try {
        c.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    return c;
}

Config load_config(const std::filesystem::path& path) {
    return parse_config(read_all(path), path.parent_path());
}

Config resolve_config(const std::optional<std::filesystem::path>& cli_path) {
    if (cli_path) return load_config(*cli_path);
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) return load_config(env);
    return Config{};
}

std::optional<std::uint64_t> KeyRing::find(std::uint64_t seed_id) const {
    for (auto s : seeds) {
        if (seed_identifier(s) == seed_id) return s;
    }
    return std::nullopt;
}

KeyRing parse_key_file(std::string_view text) {
    KeyRing ring;
    for_each_entry(text, [&](std::string_view k, std::string_view v, std::size_t line) {
        if (k != "seed") throw ConfigError("key file line " + std::to_string(line) + ": expected 'seed = <n>'");
        ring.seeds.push_back(parse_number<std::uint64_t>(v, k));
    });
    return ring;
}

KeyRing load_key_file(const std::filesystem::path& path) { return parse_key_file(read_all(path)); }

void write_key_file(const KeyRing& keys, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (auto s : keys.seeds) out << "seed = " << s << '\n';
}

}  // namespace emcc
