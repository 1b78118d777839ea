#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "emcc/matcher.hpp"
#include "emcc/mcc.hpp"
#include "emcc/minutiae.hpp"
#include "emcc/transform.hpp"

namespace emcc {

// ---------------------------------------------------------------------------
// Error-rate metrics. A comparison is accepted when score >= threshold, so
// FMR(t) = #{imposter >= t} / N_imp and FNMR(t) = #{genuine < t} / N_gen.
// Candidate thresholds are the distinct observed scores plus +infinity.

struct DetPoint {
    double threshold;
    double fmr;
    double fnmr;
};

/// Equal-error rate in percent: first candidate threshold where FMR <= FNMR;
/// if the rates are not equal there, linear interpolation between it and the
/// previous threshold. Throws EmptyScores.
double compute_eer(std::span<const double> genuine, std::span<const double> imposter);

/// Lowest FNMR (percent) over thresholds with FMR <= 0.1%. With fewer than
/// 1000 imposters that means no false match at all. Throws EmptyScores.
double compute_fmr1000(std::span<const double> genuine, std::span<const double> imposter);

/// DET points sorted by FMR ascending (FNMR non-increasing). grid >= 2 uses
/// that many evenly spaced thresholds from the lowest score to just above the
/// highest; grid == 0 uses every candidate threshold. Throws EmptyScores.
std::vector<DetPoint> det_curve(std::span<const double> genuine, std::span<const double> imposter,
                                std::size_t grid = 0);

// ---------------------------------------------------------------------------
// FVC-shaped datasets: F fingers x I impressions, files <finger>_<impression>.min.

struct Dataset {
    std::vector<MinutiaeRecord> records;  // finger-major, impression-minor
    std::size_t fingers = 0;
    std::size_t impressions = 0;

    const MinutiaeRecord& at(std::size_t finger, std::size_t impression) const {
        return records[finger * impressions + impression];
    }
};

/// Loads every *.min file in `dir`. Throws DatasetShapeError unless each
/// finger has the same set of impressions.
Dataset load_dataset(const std::filesystem::path& dir, MinutiaeFormat format = MinutiaeFormat::PlainText);

/// Arranges in-memory records the same way load_dataset does.
Dataset make_dataset(std::vector<MinutiaeRecord> records);

struct Comparison {
    std::string query;     // "<finger>_<impression>"
    std::string enrolled;
    double score = 0.0;
};

struct StageTiming {
    double build_ms = 0.0;      // mean per record
    double transform_ms = 0.0;  // mean per record
    double match_ms = 0.0;      // mean per comparison
};

struct EvalSettings {
    TransformKey key;
    MccParams mcc;
    GreedyParams greedy;
};

struct EvalReport {
    EvalSettings settings;
    std::size_t fingers = 0;
    std::size_t impressions = 0;
    std::vector<Comparison> genuine;
    std::vector<Comparison> imposter;
    double eer = 0.0;      // percent
    double fmr1000 = 0.0;  // percent
    std::vector<DetPoint> det_points;
    std::vector<std::size_t> genuine_histogram;   // 20 bins of width 0.05 over [0, 1]
    std::vector<std::size_t> imposter_histogram;
    std::size_t empty_templates = 0;
    StageTiming timing;

    std::vector<double> genuine_scores() const;
    std::vector<double> imposter_scores() const;
};

inline std::size_t genuine_pair_count(std::size_t fingers, std::size_t impressions) {
    return fingers * impressions * (impressions - 1) / 2;
}
inline std::size_t imposter_pair_count(std::size_t fingers) { return fingers * (fingers - 1) / 2; }

/// Genuine: every unordered impression pair of each finger. Imposter: every
/// unordered pair of first impressions across fingers. A pair involving a
/// template without valid features scores 0.
EvalReport run_fvc_protocol(const Dataset& dataset, const EvalSettings& settings);
EvalReport run_fvc_protocol(const std::filesystem::path& dir, const EvalSettings& settings);

/// 20 bins of width 0.05 over [0, 1]; 1.0 falls in the last bin.
std::vector<std::size_t> score_histogram(std::span<const double> scores);

/// Writes scores_genuine.csv, scores_imposter.csv, det.csv, histogram.csv and
/// report.json into `out_dir` (created if needed).
void write_report_files(const EvalReport& report, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Code statistics over the encoding stage.

/// Two-bit code index: 0 = "00", 1 = "01", 2 = "10", 3 = "11".
using CodeCounts = std::array<std::size_t, 4>;

struct CodeStats {
    std::size_t features = 0;
    CodeCounts e_bar{};  // encoded units before XOR folding
    CodeCounts e_hat{};  // units after XOR folding
    /// Histogram of e/2 over [-1, 1] in 0.05 bins (40 bins).
    std::vector<std::size_t> half_difference_histogram;

    static std::array<double, 4> frequencies(const CodeCounts& c);
};

/// Runs the staged transform on every valid feature and tallies codes.
CodeStats code_distribution_stats(std::span<const CylinderFeature> features, const TransformKey& key);

/// Tallies the stored units of protected templates (e_hat only).
CodeCounts template_unit_counts(std::span<const CancelableTemplate> templates);

/// log10 of prod_i p_i^n_i, evaluated as a sum of logarithms.
double log10_product_of_powers(std::span<const double> probabilities, std::span<const double> exponents);

}  // namespace emcc
