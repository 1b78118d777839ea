#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "emcc/matcher.hpp"
#include "emcc/mcc.hpp"
#include "emcc/transform.hpp"

namespace emcc {

/// Environment variable consulted when no --config path is given.
inline constexpr const char* kConfigEnvVar = "EMCC_CONFIG";

/// Settings file: one "key = value" per line, '#' starts a comment.
///
///   mcc.n_s, mcc.n_d, mcc.radius, mcc.sigma_s, mcc.sigma_d,
///   mcc.min_contributing_minutiae, mcc.psi_mu, mcc.psi_tau
///   transform.p (e.g. "1", "2/3", "1/2"), transform.tau, transform.depth
///   greedy.min_pairs, greedy.max_pairs, greedy.mu_p, greedy.tau_p
///   match.threshold
///   key_file        path to the key file, relative to the config file
///   dataset.path    default dataset directory for evaluate
///
/// Unknown keys are a ConfigError. The seed itself never appears here.
struct Config {
    MccParams mcc;
    TransformKey transform;  // seed field unused; seeds come from the key file
    GreedyParams greedy;
    double match_threshold = 0.55;
    std::optional<std::filesystem::path> key_file;
    std::optional<std::filesystem::path> dataset_path;

    void validate() const;
};

Config parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

/// --config if given, else $EMCC_CONFIG if set, else built-in defaults.
Config resolve_config(const std::optional<std::filesystem::path>& cli_path);

/// Parses "1", "2/3", "0.5" into a p fraction.
std::pair<std::uint16_t, std::uint16_t> parse_fraction(std::string_view s);

/// Key file: lines "seed = <unsigned 64-bit>", '#' comments. Several seeds
/// may be listed; templates name theirs by seed identifier.
struct KeyRing {
    std::vector<std::uint64_t> seeds;

    /// Seed whose identifier equals `seed_id`, if any.
    std::optional<std::uint64_t> find(std::uint64_t seed_id) const;
};

KeyRing parse_key_file(std::string_view text);
KeyRing load_key_file(const std::filesystem::path& path);
void write_key_file(const KeyRing& keys, const std::filesystem::path& path);

}  // namespace emcc
