#include "emcc/pipeline.hpp"

#include "emcc/error.hpp"

namespace emcc {

CancelableTemplate enroll_record(const MinutiaeRecord& record, const MccParams& params, const TransformKey& key,
                                 const IndexSet& idx) {
    if (idx.l_c != params.cell_count()) throw LengthError("index set was derived for a different cell count");
    const auto cylinders = build_cylinders(record, params);
    CancelableTemplate t;
    t.features = transform_features(cylinders, idx, key);
    t.header = make_header(key, params.cell_count(), t.features.size());
    return t;
}

CancelableTemplate enroll_record(const MinutiaeRecord& record, const MccParams& params, const TransformKey& key) {
    return enroll_record(record, params, key, derive_index_set(key, params.cell_count()));
}

}  // namespace emcc
