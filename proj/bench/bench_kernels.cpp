#include <benchmark/benchmark.h>

#include "emcc/matcher.hpp"
#include "emcc/mcc.hpp"
#include "emcc/synth.hpp"
#include "emcc/transform.hpp"

namespace {

using namespace emcc;

// One dense record and its features, shared by every benchmark.
struct Fixture {
    MinutiaeRecord record;
    std::vector<CylinderFeature> cylinders;
    TransformKey key;
    IndexSet idx;
    std::vector<CancelableFeature> protected_a;
    std::vector<CancelableFeature> protected_b;

    Fixture() {
        SynthParams sp;
        sp.fingers = 2;
        sp.impressions = 1;
        sp.min_minutiae = 60;
        sp.max_minutiae = 60;
        sp.seed = 11;
        const auto recs = synth_records(sp);
        record = recs[0];
        cylinders = valid_cylinders(build_cylinders(record, {}));
        key.seed = 3;
        idx = derive_index_set(key, MccParams{}.cell_count());
        protected_a = transform_features(cylinders, idx, key);
        protected_b = transform_features(valid_cylinders(build_cylinders(recs[1], {})), idx, key);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

void BM_BuildCylinders(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(build_cylinders(f.record, {}));
}

void BM_BuildCylindersSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(serial::build_cylinders(f.record, {}));
}

void BM_Transform(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(transform_features(f.cylinders, f.idx, f.key));
}

void BM_TransformSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(serial::transform_features(f.cylinders, f.idx, f.key));
}

void BM_SimilarityMatrix(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(similarity_matrix(f.protected_a, f.protected_b));
}

void BM_SimilarityMatrixSerial(benchmark::State& state) {
    const auto& f = fixture();
    for (auto _ : state) benchmark::DoNotOptimize(serial::similarity_matrix(f.protected_a, f.protected_b));
}

}  // namespace

BENCHMARK(BM_BuildCylinders)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BuildCylindersSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Transform)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_TransformSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SimilarityMatrix)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SimilarityMatrixSerial)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
