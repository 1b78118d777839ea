#pragma once

// Test and analysis hook: exposes every intermediate of the cancelable
// transform. Not part of the template API; nothing here is persisted.

#include <vector>

#include "emcc/transform.hpp"

namespace emcc::debug {

struct PipelineStages {
    std::vector<double> c_prime;    // l
    BitVector b_prime;              // l
    std::vector<double> e_first;    // l / 2, first nesting layer
    std::vector<double> e;          // l / 2^depth
    BitVector d;                    // l / 2^depth
    BitVector e_bar;                // 2 * l / 2^depth bits
    BitVector e_hat;                // l / 2^depth bits
    BitVector d_hat;                // l / 2^(depth + 1) bits
};

PipelineStages pipeline_stages(const CylinderFeature& feature, const IndexSet& idx, const TransformKey& key);

}  // namespace emcc::debug
