#pragma once

#include "emcc/mcc.hpp"
#include "emcc/minutiae.hpp"
#include "emcc/template.hpp"
#include "emcc/transform.hpp"

namespace emcc {

/// Minutiae -> cylinders -> valid cylinders -> protected template.
/// Nothing but the protected bits and the header leaves this function.
CancelableTemplate enroll_record(const MinutiaeRecord& record, const MccParams& params, const TransformKey& key,
                                 const IndexSet& idx);

CancelableTemplate enroll_record(const MinutiaeRecord& record, const MccParams& params, const TransformKey& key);

}  // namespace emcc
