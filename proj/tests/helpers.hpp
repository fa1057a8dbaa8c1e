#pragma once

#include <vector>

#include "memshrink/rng.hpp"
#include "memshrink/types.hpp"

namespace memshrink::test {

inline FeatureFrame make_frame(int h, int w, int c, std::vector<float> data,
                               std::int64_t index = 0, bool prompt = false) {
    FeatureFrame frame;
    frame.frame_index = index;
    frame.h = h;
    frame.w = w;
    frame.c = c;
    frame.data = std::move(data);
    frame.is_prompt = prompt;
    return frame;
}

inline FeatureFrame random_frame(Xoshiro256pp& rng, int h, int w, int c,
                                 std::int64_t index = 0) {
    FeatureFrame frame = make_frame(h, w, c, {}, index);
    frame.data.resize(static_cast<std::size_t>(h) * w * c);
    for (auto& v : frame.data) {
        v = static_cast<float>(rng.next_uniform(-3.0, 3.0));
    }
    return frame;
}

inline CompressedFrame random_pooled(Xoshiro256pp& rng, int ph, int pw, int c,
                                     std::int64_t index, bool is_gt) {
    CompressedFrame frame;
    frame.frame_index = index;
    frame.pooled_h = ph;
    frame.pooled_w = pw;
    frame.c = c;
    frame.is_gt = is_gt;
    frame.tokens.resize(static_cast<std::size_t>(ph) * pw * c);
    for (auto& v : frame.tokens) {
        v = static_cast<float>(rng.next_uniform(-1.0, 1.0));
    }
    return frame;
}

}  // namespace memshrink::test
