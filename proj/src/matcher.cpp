#include "emcc/matcher.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "emcc/error.hpp"

namespace emcc {
namespace {

// Spreads the low 32 bits of x so bit i lands on bits 2i and 2i + 1.
std::uint64_t duplicate_bits(std::uint32_t x) {
    std::uint64_t v = x;
    v = (v | (v << 16)) & 0x0000FFFF0000FFFFull;
    v = (v | (v << 8)) & 0x00FF00FF00FF00FFull;
    v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0Full;
    v = (v | (v << 2)) & 0x3333333333333333ull;
    v = (v | (v << 1)) & 0x5555555555555555ull;
    return v | (v << 1);
}

// Value bits plus the validity mask already widened to unit granularity.
struct Prepared {
    std::vector<std::uint64_t> e;
    std::vector<std::uint64_t> mask;
};

Prepared prepare(const CancelableFeature& f) {
    Prepared p;
    const auto ew = f.e_hat.words();
    p.e.assign(ew.begin(), ew.end());
    p.mask.assign(ew.size(), 0);
    const auto dw = f.d_hat.words();
    for (std::size_t i = 0; i < p.mask.size(); ++i) {
        const std::uint64_t src = dw[i / 2];
        p.mask[i] = duplicate_bits(static_cast<std::uint32_t>(i % 2 == 0 ? src : src >> 32));
    }
    return p;
}

double similarity(const Prepared& q, const Prepared& p) {
    std::size_t na = 0, nb = 0, nx = 0;
    for (std::size_t i = 0; i < q.e.size(); ++i) {
        const std::uint64_t m = q.mask[i] & p.mask[i];
        const std::uint64_t a = q.e[i] & m;
        const std::uint64_t b = p.e[i] & m;
        na += static_cast<std::size_t>(std::popcount(a));
        nb += static_cast<std::size_t>(std::popcount(b));
        nx += static_cast<std::size_t>(std::popcount(a ^ b));
    }
    if (na == 0 && nb == 0) return 0.0;
    return 1.0 - std::sqrt(double(nx)) / (std::sqrt(double(na)) + std::sqrt(double(nb)));
}

void check_sizes(std::span<const CancelableFeature> a, std::span<const CancelableFeature> b) {
    const CancelableFeature* ref = !a.empty() ? &a.front() : (!b.empty() ? &b.front() : nullptr);
    if (!ref) return;
    auto same = [&](const CancelableFeature& f) {
        return f.e_hat.size() == ref->e_hat.size() && f.d_hat.size() == ref->d_hat.size() &&
               f.e_hat.size() == 2 * f.d_hat.size();
    };
    if (!std::all_of(a.begin(), a.end(), same) || !std::all_of(b.begin(), b.end(), same)) {
        throw KeyMismatch("features have different unit counts");
    }
}

std::vector<Prepared> prepare_all(std::span<const CancelableFeature> fs) {
    std::vector<Prepared> out;
    out.reserve(fs.size());
    for (const auto& f : fs) out.push_back(prepare(f));
    return out;
}

}  // namespace

ScoreMatrix ScoreMatrix::transposed() const {
    ScoreMatrix t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
    }
    return t;
}

void GreedyParams::validate() const {
    if (min_pairs < 1 || min_pairs > max_pairs) throw ParamError("need 1 <= min_pairs <= max_pairs");
}

double feature_similarity(const CancelableFeature& q, const CancelableFeature& p) {
    check_sizes(std::span(&q, 1), std::span(&p, 1));
    return similarity(prepare(q), prepare(p));
}

ScoreMatrix similarity_matrix(std::span<const CancelableFeature> query, std::span<const CancelableFeature> enrolled) {
    check_sizes(query, enrolled);
    const auto pq = prepare_all(query);
    const auto pe = prepare_all(enrolled);
    ScoreMatrix s(query.size(), enrolled.size());
    const auto rows = static_cast<std::ptrdiff_t>(s.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
        const auto ur = static_cast<std::size_t>(r);
        for (std::size_t c = 0; c < s.cols; ++c) s.at(ur, c) = similarity(pq[ur], pe[c]);
    }
    return s;
}

ScoreMatrix score_matrix(const CancelableTemplate& query, const CancelableTemplate& enrolled) {
    require_same_family(query.header, enrolled.header);
    if (query.features.empty() || enrolled.features.empty()) throw EmptyTemplate("template has no features");
    return similarity_matrix(query.features, enrolled.features);
}

std::size_t greedy_pair_count(std::size_t n, std::size_t m, const GreedyParams& gp) {
    gp.validate();
    const double v = double(std::min(n, m));
    const double z = 1.0 / (1.0 + std::exp(-gp.tau_p * (v - gp.mu_p)));
    return static_cast<std::size_t>(
        std::lround(double(gp.min_pairs) + double(gp.max_pairs - gp.min_pairs) * z));
}

MatchDecision greedy_decision_score(const ScoreMatrix& s, const GreedyParams& gp) {
    MatchDecision d;
    if (s.values.empty()) return d;
    const std::size_t want = greedy_pair_count(s.rows, s.cols, gp);

    std::vector<std::size_t> order(s.values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s.values[a] > s.values[b]; });

    std::vector<bool> row_used(s.rows), col_used(s.cols);
    double sum = 0.0;
    for (std::size_t flat : order) {
        if (d.pairs_used.size() == want) break;
        const std::size_t r = flat / s.cols, c = flat % s.cols;
        if (row_used[r] || col_used[c]) continue;
        row_used[r] = col_used[c] = true;
        d.pairs_used.emplace_back(r, c);
        sum += s.values[flat];
    }
    d.score = sum / double(d.pairs_used.size());
    return d;
}

MatchDecision match_templates(const CancelableTemplate& query, const CancelableTemplate& enrolled,
                              const GreedyParams& gp) {
    return greedy_decision_score(score_matrix(query, enrolled), gp);
}

namespace serial {

// Direct per-bit evaluation of the similarity formula, no word packing.
ScoreMatrix similarity_matrix(std::span<const CancelableFeature> query, std::span<const CancelableFeature> enrolled) {
    check_sizes(query, enrolled);
    ScoreMatrix s(query.size(), enrolled.size());
    for (std::size_t r = 0; r < s.rows; ++r) {
        for (std::size_t c = 0; c < s.cols; ++c) {
            const auto& q = query[r];
            const auto& p = enrolled[c];
            std::size_t na = 0, nb = 0, nx = 0;
            for (std::size_t u = 0; u < q.d_hat.size(); ++u) {
                if (!(q.d_hat.get(u) && p.d_hat.get(u))) continue;
                for (std::size_t bit = 2 * u; bit < 2 * u + 2; ++bit) {
                    const bool a = q.e_hat.get(bit), b = p.e_hat.get(bit);
                    na += a;
                    nb += b;
                    nx += a != b;
                }
            }
            s.at(r, c) = (na == 0 && nb == 0)
                             ? 0.0
                             : 1.0 - std::sqrt(double(nx)) / (std::sqrt(double(na)) + std::sqrt(double(nb)));
        }
    }
    return s;
}

}  // namespace serial
}  // namespace emcc
