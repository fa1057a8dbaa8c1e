#include "memshrink/pooling.hpp"

#include <algorithm>
#include <limits>

namespace memshrink {

namespace {

void require_divisible(int h, int w, const EngineConfig& config) {
    if (config.pool_dh <= 0 || config.pool_dw <= 0 || h % config.pool_dh != 0 ||
        w % config.pool_dw != 0) {
        throw EngineError(ErrorCode::pooling_divisibility,
                          "pool window " + std::to_string(config.pool_dh) + "x" +
                              std::to_string(config.pool_dw) + " does not divide " +
                              std::to_string(h) + "x" + std::to_string(w));
    }
}

}  // namespace

std::int64_t pooled_token_count(int h, int w, const EngineConfig& config) {
    require_divisible(h, w, config);
    return (static_cast<std::int64_t>(h) / config.pool_dh) * (w / config.pool_dw);
}

CompressedFrame pool_frame(const FeatureFrame& frame, const EngineConfig& config) {
    require_divisible(frame.h, frame.w, config);

    const int dh = config.pool_dh;
    const int dw = config.pool_dw;
    CompressedFrame out;
    out.frame_index = frame.frame_index;
    out.pooled_h = frame.h / dh;
    out.pooled_w = frame.w / dw;
    out.c = frame.c;
    out.is_gt = frame.is_prompt;
    out.tokens.resize(static_cast<std::size_t>(out.pooled_h) * out.pooled_w * frame.c);

    const double inv_window = 1.0 / (static_cast<double>(dh) * dw);
    for (int i = 0; i < out.pooled_h; ++i) {
        for (int j = 0; j < out.pooled_w; ++j) {
            float* cell = out.token(i, j);
            for (int k = 0; k < frame.c; ++k) {
                if (config.pooling == PoolingKind::average) {
                    double sum = 0.0;
                    for (int r = i * dh; r < (i + 1) * dh; ++r) {
                        for (int col = j * dw; col < (j + 1) * dw; ++col) {
                            sum += frame.at(r, col, k);
                        }
                    }
                    cell[k] = static_cast<float>(sum * inv_window);
                } else {
                    float best = -std::numeric_limits<float>::infinity();
                    for (int r = i * dh; r < (i + 1) * dh; ++r) {
                        for (int col = j * dw; col < (j + 1) * dw; ++col) {
                            best = std::max(best, frame.at(r, col, k));
                        }
                    }
                    cell[k] = best;
                }
            }
        }
    }
    return out;
}

}  // namespace memshrink
