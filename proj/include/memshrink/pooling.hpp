#pragma once

#include "memshrink/types.hpp"

namespace memshrink {

// Windowed pooling (h, w, c) -> (h/dh, w/dw, c) with stride equal to the
// window; average sums in double and divides once by dh*dw.
CompressedFrame pool_frame(const FeatureFrame& frame, const EngineConfig& config);

// Closed-form pooled token count h*w/(dh*dw); throws on non-divisible dims.
std::int64_t pooled_token_count(int h, int w, const EngineConfig& config);

}  // namespace memshrink
