#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "emcc/template.hpp"

namespace emcc {

/// n x m similarities between query (rows) and enrolled (columns) features.
struct ScoreMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;  // row-major

    ScoreMatrix() = default;
    ScoreMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    ScoreMatrix transposed() const;
};

/// Local greedy consolidation parameters. The number of pairs averaged is
/// min_pairs + (max_pairs - min_pairs) * sigmoid(min(n, m); mu_p, tau_p),
/// rounded to nearest.
struct GreedyParams {
    std::size_t min_pairs = 4;
    std::size_t max_pairs = 12;
    double mu_p = 20.0;
    double tau_p = 0.4;

    void validate() const;
};

struct MatchDecision {
    double score = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs_used;
};

/// Similarity of two protected features:
///   d = d_q AND d_p, duplicated per bit to cover both bits of each unit;
///   a = e_q AND d, b = e_p AND d;
///   s = 1 - |a XOR b| / (|a| + |b|), |.| = sqrt(popcount).
/// Returns 0 when a and b are both empty. KeyMismatch if the unit counts differ.
double feature_similarity(const CancelableFeature& q, const CancelableFeature& p);

/// Pairwise similarities without any key-family check; callers that compare
/// templates use score_matrix. Parallel over rows.
ScoreMatrix similarity_matrix(std::span<const CancelableFeature> query, std::span<const CancelableFeature> enrolled);

/// Throws KeyMismatch for different key families and EmptyTemplate when
/// either side has no features.
ScoreMatrix score_matrix(const CancelableTemplate& query, const CancelableTemplate& enrolled);

std::size_t greedy_pair_count(std::size_t n, std::size_t m, const GreedyParams& gp);

/// Repeatedly takes the largest remaining entry whose row and column are both
/// unused, up to greedy_pair_count picks, and averages them. Ties break by
/// (row, column).
MatchDecision greedy_decision_score(const ScoreMatrix& s, const GreedyParams& gp);

/// score_matrix followed by greedy_decision_score.
MatchDecision match_templates(const CancelableTemplate& query, const CancelableTemplate& enrolled,
                              const GreedyParams& gp);

namespace serial {
ScoreMatrix similarity_matrix(std::span<const CancelableFeature> query, std::span<const CancelableFeature> enrolled);
}  // namespace serial

}  // namespace emcc
