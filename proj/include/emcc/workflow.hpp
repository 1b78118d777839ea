#pragma once

// Library-level versions of the CLI commands. The CLI only parses arguments,
// calls these, and prints the returned values.

#include <cstdint>
#include <filesystem>
#include <optional>

#include "emcc/config.hpp"
#include "emcc/eval.hpp"
#include "emcc/minutiae.hpp"
#include "emcc/synth.hpp"
#include "emcc/template.hpp"

namespace emcc {

/// Full transform key from config parameters plus a seed.
TransformKey key_from_config(const Config& config, std::uint64_t seed);

/// Key a stored template was produced with; the seed is looked up in `keys`
/// by the header's seed identifier. KeyMismatch if no seed matches.
TransformKey key_for_header(const TemplateHeader& header, const KeyRing& keys);

struct EnrollResult {
    CancelableTemplate tmpl;
    std::size_t payload_bits = 0;
    std::size_t total_bytes = 0;
};

/// Throws Error("no valid features") when no cylinder survives.
EnrollResult enroll(const Config& config, const MinutiaeRecord& record, std::uint64_t seed);

struct MatchResult {
    double score = 0.0;
    bool is_match = false;
    std::size_t pairs_used = 0;
};

/// Transforms the query minutiae under the enrolled template's key and
/// compares. KeyMismatch when the template's seed is not in `keys` or its unit
/// count disagrees with the config's cylinder size.
MatchResult match(const Config& config, const KeyRing& keys, const MinutiaeRecord& query,
                  const CancelableTemplate& enrolled);

struct RevokeResult {
    CancelableTemplate tmpl;
    std::uint64_t old_seed_id = 0;
    std::uint64_t new_seed_id = 0;
    /// Decision score between the old and the new template, compared without
    /// the key-family check. Unlinkable templates score at imposter level.
    double cross_key_score = 0.0;
};

/// Re-enrolls `source` under `new_seed`, keeping the old template's p, depth
/// and tau. SameSeedError if the new seed has the old seed identifier.
RevokeResult revoke(const Config& config, const CancelableTemplate& old_template, std::uint64_t new_seed,
                    const MinutiaeRecord& source);

/// Decision score between two templates of equal unit count, ignoring which
/// keys produced them. 0 if either is empty.
double cross_key_decision_score(const CancelableTemplate& a, const CancelableTemplate& b, const GreedyParams& gp);

struct EvaluateRequest {
    std::optional<std::filesystem::path> dataset;
    std::optional<SynthParams> synthetic;  // used when dataset is empty
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
};

/// Runs the protocol and writes the report files. DatasetShapeError if the
/// dataset directory is missing or malformed.
EvalReport evaluate(const Config& config, const EvaluateRequest& request);

}  // namespace emcc
