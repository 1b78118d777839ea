#include <gtest/gtest.h>
#include <omp.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "emcc/error.hpp"
#include "emcc/synth.hpp"
#include "emcc/transform.hpp"
#include "emcc/transform_debug.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace emcc;

namespace {

TransformKey key_with(std::uint64_t seed, std::uint16_t pn = 1, std::uint16_t pd = 1, std::uint8_t depth = 2) {
    TransformKey k;
    k.seed = seed;
    k.p_num = pn;
    k.p_den = pd;
    k.depth = depth;
    return k;
}

std::string units_of(const BitVector& b) {
    std::string s;
    for (std::size_t i = 0; i < b.size(); ++i) s += b.get(i) ? '1' : '0';
    return s;
}

IndexSet identity_set(std::size_t n) {
    IndexSet idx;
    idx.l_c = n;
    for (std::uint32_t i = 0; i < n; ++i) idx.indices.push_back(i);
    return idx;
}

}  // namespace

TEST(IndexSet, LengthsForTheThreeFractions) {
    EXPECT_EQ(key_with(1).selected_length(1280), 1280u);
    EXPECT_EQ(key_with(1, 1, 2).selected_length(1280), 640u);
    EXPECT_EQ(key_with(1, 2, 3).selected_length(1280), 848u);
    EXPECT_EQ(key_with(1).unit_count(1280), 160u);
    EXPECT_EQ(key_with(1, 1, 2).unit_count(1280), 80u);
    EXPECT_EQ(key_with(1, 2, 3).unit_count(1280), 106u);
    EXPECT_EQ(key_with(1, 1, 1, 3).unit_count(1280), 80u);
    EXPECT_EQ(key_with(1, 2, 3, 3).unit_count(1280), 53u);
    EXPECT_THROW(key_with(1, 1, 1, 3).unit_count(1272), ParamError);  // 1272 is not a multiple of 16
}

TEST(IndexSet, FullPermutationAtPOne) {
    const auto idx = derive_index_set(key_with(42), 1280);
    EXPECT_EQ(idx.l(), 1280u);
    EXPECT_EQ(idx.k(), 160u);
    std::vector<std::uint32_t> sorted = idx.indices;
    std::sort(sorted.begin(), sorted.end());
    for (std::uint32_t i = 0; i < 1280; ++i) ASSERT_EQ(sorted[i], i);
}

TEST(IndexSet, DistinctInRangeAndDeterministic) {
    for (auto [pn, pd] : {std::pair<int, int>{1, 2}, {2, 3}, {3, 4}, {1, 1}}) {
        for (std::uint64_t seed : {0ull, 1ull, 123456789ull, ~0ull}) {
            const auto k = key_with(seed, std::uint16_t(pn), std::uint16_t(pd));
            const auto a = derive_index_set(k, 1280);
            const auto b = derive_index_set(k, 1280);
            EXPECT_EQ(a.indices, b.indices);
            EXPECT_EQ(a.l() % 8, 0u);
            const std::set<std::uint32_t> uniq(a.indices.begin(), a.indices.end());
            EXPECT_EQ(uniq.size(), a.l());
            EXPECT_LT(*uniq.rbegin(), 1280u);
        }
    }
}

TEST(IndexSet, SeedsDiffer) {
    EXPECT_NE(derive_index_set(key_with(1), 1280).indices, derive_index_set(key_with(2), 1280).indices);
    EXPECT_NE(seed_identifier(1), seed_identifier(2));
    EXPECT_EQ(key_with(5).seed_id(), seed_identifier(5));
}

// Shorter selections are prefixes of the same shuffle.
TEST(IndexSet, PrefixStableAcrossFractions) {
    const auto full = derive_index_set(key_with(9), 1280);
    const auto half = derive_index_set(key_with(9, 1, 2), 1280);
    EXPECT_TRUE(std::equal(half.indices.begin(), half.indices.end(), full.indices.begin()));
}

TEST(IndexSet, Errors) {
    EXPECT_THROW(derive_index_set(key_with(1), 15), ParamError);
    EXPECT_THROW(derive_index_set(key_with(1, 1, 3), 1280), ParamError);  // p below 1/2
    auto k = key_with(1);
    k.depth = 4;
    EXPECT_THROW(derive_index_set(k, 1280), ParamError);
    k = key_with(1);
    k.tau_millis = 0;
    EXPECT_THROW(k.validate(), ParamError);
}

TEST(Reindex, IdentityAndGather) {
    std::mt19937_64 rng(3);
    const auto f = fixtures::random_cylinder(rng);
    const auto [c, b] = reindex(f, identity_set(1280));
    EXPECT_EQ(c, f.cell_values);
    EXPECT_EQ(b, expand_mask(f.base_mask, 5));

    CylinderFeature small;
    small.valid = true;
    small.cell_values = {0.2, 0.5, 0.9, 0.1};
    small.base_mask = BitVector::from_string("1001");
    IndexSet idx{{2, 0}, 4};  // the 1-based set [3, 1]
    const auto [c2, b2] = reindex(small, idx);
    EXPECT_EQ(c2, (std::vector<double>{0.9, 0.2}));
    EXPECT_EQ(units_of(b2), "01");
}

TEST(Reindex, GatheredValuesComeFromTheFeature) {
    std::mt19937_64 rng(4);
    const auto f = fixtures::random_cylinder(rng);
    const auto idx = derive_index_set(key_with(8, 2, 3), 1280);
    auto [c, b] = reindex(f, idx);
    std::multiset<double> pool(f.cell_values.begin(), f.cell_values.end());
    for (double v : c) {
        auto it = pool.find(v);
        ASSERT_NE(it, pool.end());
        pool.erase(it);
    }
}

TEST(Reindex, LengthMismatch) {
    std::mt19937_64 rng(4);
    const auto f = fixtures::random_cylinder(rng);
    EXPECT_THROW(reindex(f, identity_set(640)), LengthError);
}

TEST(NestedDifference, Examples) {
    const std::vector<double> v{0.9, 0.1, 0.2, 0.6};
    EXPECT_NEAR(nested_difference(v, 2)[0], 1.2, 1e-15);
    const std::vector<double> same{0.3, 0.3, 0.3, 0.3};
    EXPECT_EQ(nested_difference(same, 2)[0], 0.0);
    const std::vector<double> eight{1, 0, 0, 0, 0, 0, 0, 1};
    EXPECT_EQ(nested_difference(eight, 3)[0], 0.0);
    EXPECT_EQ(nested_difference(eight, 1), (std::vector<double>{1, 0, 0, -1}));
    EXPECT_THROW(nested_difference(std::vector<double>{1, 2, 3}, 1), LengthError);
    EXPECT_THROW(nested_difference(std::vector<double>{1, 2, 3, 4, 5, 6}, 2), LengthError);
}

TEST(NestedDifference, RangeBound) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 1);
    for (int depth = 1; depth <= 3; ++depth) {
        std::vector<double> v(1024);
        for (auto& x : v) x = u(rng);
        for (double e : nested_difference(v, depth)) ASSERT_LE(std::fabs(e), double(1 << (depth - 1)));
    }
}

TEST(FoldMask, Examples) {
    EXPECT_EQ(fold_mask(BitVector(16), 2).popcount(), 0u);
    EXPECT_EQ(units_of(fold_mask(BitVector::from_string("0010"), 2)), "1");
    EXPECT_EQ(units_of(fold_mask(BitVector::from_string("0010 0000 1100"), 2)), "101");
    EXPECT_THROW(fold_mask(BitVector(6), 2), LengthError);
}

TEST(FoldMask, PopcountBound) {
    std::mt19937_64 rng(13);
    std::bernoulli_distribution coin(0.2);
    for (int depth = 1; depth <= 3; ++depth) {
        for (int trial = 0; trial < 100; ++trial) {
            BitVector b(256);
            for (std::size_t i = 0; i < 256; ++i) b.set(i, coin(rng));
            const std::size_t group = std::size_t{1} << depth;
            ASSERT_GE(fold_mask(b, depth).popcount(), (b.popcount() + group - 1) / group);
        }
    }
}

TEST(Encode, TableValues) {
    EXPECT_EQ(units_of(encode(std::vector<double>{1.2}, 0.2)), "10");
    EXPECT_EQ(units_of(encode(std::vector<double>{-0.5}, 0.2)), "01");
    EXPECT_EQ(units_of(encode(std::vector<double>{0.1}, 0.2)), "00");
    // Boundaries are inclusive on both signed branches.
    EXPECT_EQ(units_of(encode(std::vector<double>{0.5, -0.5}, 0.25)), "1001");
    EXPECT_THROW(encode(std::vector<double>{0.1}, 0.0), ParamError);
}

TEST(Encode, EveryCodeHasAnIntervalOfPreimages) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::map<std::string, std::set<double>> pre;
    for (int i = 0; i < 5000; ++i) {
        const double e = u(rng);
        pre[units_of(encode(std::vector<double>{e}, 0.2))].insert(e);
    }
    ASSERT_EQ(pre.size(), 3u);
    for (const auto& [code, vals] : pre) {
        EXPECT_GE(vals.size(), 100u) << code;
        // Each preimage set is contiguous: nothing of another code lies between its extremes.
        for (const auto& [other, ovals] : pre) {
            if (other == code) continue;
            for (double v : ovals) ASSERT_FALSE(v > *vals.begin() && v < *vals.rbegin());
        }
    }
}

TEST(XorFold, Examples) {
    EXPECT_EQ(units_of(xor_fold(BitVector::from_string("10 00"))), "10");
    EXPECT_EQ(units_of(xor_fold(BitVector::from_string("01 01"))), "00");
    EXPECT_EQ(units_of(xor_fold(BitVector::from_string("10 01"))), "11");
    EXPECT_THROW(xor_fold(BitVector::from_string("10 01 00")), LengthError);
}

TEST(XorFold, EachOutputHasExactlyFourPreimages) {
    std::map<std::string, int> count;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            BitVector v(4);
            v.set(0, a & 2);
            v.set(1, a & 1);
            v.set(2, b & 2);
            v.set(3, b & 1);
            count[units_of(xor_fold(v))]++;
        }
    }
    ASSERT_EQ(count.size(), 4u);
    for (const auto& [code, n] : count) EXPECT_EQ(n, 4) << code;
}

TEST(OrFold, Pairs) {
    EXPECT_EQ(units_of(or_fold_pairs(BitVector::from_string("00 01 10 11"))), "0111");
    EXPECT_THROW(or_fold_pairs(BitVector(3)), LengthError);
}

TEST(Pipeline, FeatureSizesPerFraction) {
    std::mt19937_64 rng(15);
    const auto f = fixtures::random_cylinder(rng);
    const auto k1 = key_with(3);
    const auto f1 = make_cancelable_feature(f, derive_index_set(k1, 1280), k1);
    EXPECT_EQ(f1.e_hat.size(), 320u);
    EXPECT_EQ(f1.d_hat.size(), 160u);
    const auto kh = key_with(3, 1, 2);
    const auto fh = make_cancelable_feature(f, derive_index_set(kh, 1280), kh);
    EXPECT_EQ(fh.e_hat.size(), 160u);
    EXPECT_EQ(fh.d_hat.size(), 80u);
}

TEST(Pipeline, StageLengthsAndRecomposition) {
    std::mt19937_64 rng(16);
    for (int depth = 1; depth <= 3; ++depth) {
        const auto k = key_with(21, 1, 1, std::uint8_t(depth));
        const auto idx = derive_index_set(k, 1280);
        const auto f = fixtures::random_cylinder(rng);
        const auto s = debug::pipeline_stages(f, idx, k);
        const std::size_t l = 1280, g = std::size_t{1} << depth;
        EXPECT_EQ(s.c_prime.size(), l);
        EXPECT_EQ(s.b_prime.size(), l);
        EXPECT_EQ(s.e_first.size(), l / 2);
        EXPECT_EQ(s.e.size(), l / g);
        EXPECT_EQ(s.d.size(), l / g);
        EXPECT_EQ(s.e_bar.size(), 2 * l / g);
        EXPECT_EQ(s.e_hat.size(), l / g);
        EXPECT_EQ(s.d_hat.size(), l / (2 * g));
        EXPECT_EQ(xor_fold(encode(nested_difference(reindex(f, idx).first, depth), k.tau())), s.e_hat);
        const auto fused = make_cancelable_feature(f, idx, k);
        EXPECT_EQ(fused.e_hat, s.e_hat);
        EXPECT_EQ(fused.d_hat, s.d_hat);
    }
}

TEST(Pipeline, ZeroFeatureEncodesToZeros) {
    CylinderFeature f;
    f.valid = true;
    f.cell_values.assign(1280, 0.0);
    f.base_mask = BitVector(256, true);
    const auto k = key_with(4);
    const auto s = debug::pipeline_stages(f, derive_index_set(k, 1280), k);
    EXPECT_EQ(s.e_bar.popcount(), 0u);
    EXPECT_EQ(s.e_hat.popcount(), 0u);
    EXPECT_EQ(s.d_hat.popcount(), 160u);
}

TEST(Pipeline, MatchesStraightLineOracle) {
    std::mt19937_64 rng(17);
    for (auto [pn, pd] : {std::pair<int, int>{1, 1}, {2, 3}, {1, 2}}) {
        for (std::uint8_t depth : {1, 2, 3}) {
            auto k = key_with(rng(), std::uint16_t(pn), std::uint16_t(pd), depth);
            std::size_t l = k.selected_length(1280);
            if (l % (std::size_t{2} << depth) != 0) continue;  // 2/3 with depth 3
            const auto idx = derive_index_set(k, 1280);
            for (int trial = 0; trial < 50; ++trial) {
                const auto f = fixtures::random_cylinder(rng, {}, trial % 2 == 0, 0.3);
                ASSERT_TRUE(oracle::same(oracle::transform(f, idx, k), make_cancelable_feature(f, idx, k)));
            }
        }
    }
}

TEST(Pipeline, InvalidFeatureRejectedAndDropped) {
    std::mt19937_64 rng(18);
    auto f = fixtures::random_cylinder(rng);
    f.valid = false;
    const auto k = key_with(1);
    const auto idx = derive_index_set(k, 1280);
    EXPECT_THROW(make_cancelable_feature(f, idx, k), ParamError);
    std::vector<CylinderFeature> fs{f, fixtures::random_cylinder(rng)};
    EXPECT_EQ(transform_features(fs, idx, k).size(), 1u);
}

TEST(Pipeline, ParallelMatchesSerial) {
    std::mt19937_64 rng(19);
    omp_set_num_threads(4);
    std::vector<CylinderFeature> fs;
    for (int i = 0; i < 200; ++i) {
        fs.push_back(fixtures::random_cylinder(rng, {}, i % 3 == 0));
        fs.back().valid = i % 7 != 0;
    }
    for (std::uint8_t depth : {1, 2, 3}) {
        const auto k = key_with(33, 1, 1, depth);
        const auto idx = derive_index_set(k, 1280);
        EXPECT_EQ(transform_features(fs, idx, k), serial::transform_features(fs, idx, k));
    }
}

TEST(Pipeline, LengthLawOverFractionSweep) {
    std::mt19937_64 rng(20);
    const auto f = fixtures::random_cylinder(rng);
    for (std::uint16_t num = 640; num <= 1280; num += 8) {
        const auto k = key_with(5, num, 1280);
        const std::size_t l = k.selected_length(1280);
        ASSERT_EQ(l % 8, 0u);
        ASSERT_EQ(l, std::size_t(num) - std::size_t(num) % 8);
        const auto out = make_cancelable_feature(f, derive_index_set(k, 1280), k);
        ASSERT_EQ(out.e_hat.size(), l / 4);
        ASSERT_EQ(out.d_hat.size(), l / 8);
    }
}

TEST(Pipeline, Deterministic) {
    std::mt19937_64 rng(21);
    const auto f = fixtures::random_cylinder(rng);
    const auto k = key_with(99, 2, 3);
    EXPECT_EQ(make_cancelable_feature(f, derive_index_set(k, 1280), k),
              make_cancelable_feature(f, derive_index_set(k, 1280), k));
}

namespace {

double hamming_similarity(const BitVector& a, const BitVector& b) {
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += a.get(i) != b.get(i);
    return 1.0 - double(diff) / double(a.size());
}

}  // namespace

// A feature under two seeds looks like two unrelated features under one.
TEST(Diversity, CrossSeedSimilarityMatchesUnrelatedFeatures) {
    SynthParams sp;
    sp.fingers = 40;
    sp.impressions = 1;
    std::vector<CylinderFeature> fs;
    for (const auto& r : synth_records(sp)) {
        for (auto& f : valid_cylinders(build_cylinders(r, {}))) fs.push_back(std::move(f));
    }
    ASSERT_GE(fs.size(), 1000u);
    for (auto [pn, pd] : {std::pair<int, int>{1, 1}, {1, 2}}) {
        const auto ka = key_with(1001, std::uint16_t(pn), std::uint16_t(pd));
        const auto kb = key_with(2002, std::uint16_t(pn), std::uint16_t(pd));
        const auto ia = derive_index_set(ka, 1280), ib = derive_index_set(kb, 1280);
        double cross = 0, unrelated = 0;
        const std::size_t n = fs.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = make_cancelable_feature(fs[i], ia, ka);
            const auto b = make_cancelable_feature(fs[i], ib, kb);
            const auto c = make_cancelable_feature(fs[(i + n / 2) % n], ia, ka);
            cross += hamming_similarity(a.e_hat, b.e_hat);
            unrelated += hamming_similarity(a.e_hat, c.e_hat);
        }
        EXPECT_NEAR(cross / double(n), unrelated / double(n), 0.02);
    }
}
