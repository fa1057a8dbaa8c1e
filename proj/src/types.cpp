#include "memshrink/types.hpp"

namespace memshrink {

const char* to_string(PoolingKind k) {
    switch (k) {
        case PoolingKind::average: return "avg";
        case PoolingKind::max: return "max";
    }
    return "?";
}

const char* to_string(Anchor a) {
    switch (a) {
        case Anchor::previous: return "prev";
        case Anchor::gt: return "gt";
    }
    return "?";
}

const char* to_string(Scope s) {
    switch (s) {
        case Scope::global: return "global";
        case Scope::per_frame: return "per-frame";
    }
    return "?";
}

const char* to_string(TemporalStrategy s) {
    switch (s) {
        case TemporalStrategy::topn_select: return "topn";
        case TemporalStrategy::no_tmc: return "no-tmc";
        case TemporalStrategy::gt_plus_last: return "gt-last";
        case TemporalStrategy::first_plus_last: return "first-last";
        case TemporalStrategy::moving_average: return "moving-avg";
        case TemporalStrategy::retain_gt_first_last: return "gt-first-last";
    }
    return "?";
}

void EngineConfig::validate() const {
    if (pool_dh <= 0 || pool_dw <= 0) {
        throw EngineError(ErrorCode::bad_config, "pool window sides must be positive");
    }
    if (bank_capacity <= 0) {
        throw EngineError(ErrorCode::bad_config, "bank capacity must be positive");
    }
    if (selection_budget && *selection_budget < 0) {
        throw EngineError(ErrorCode::bad_config, "selection budget must be >= 0");
    }
    if (!(iou_threshold >= 0.0f && iou_threshold <= 1.0f)) {
        throw EngineError(ErrorCode::bad_config, "iou threshold must lie in [0,1]");
    }
}

ValidationResult validate_frame(const FeatureFrame& frame, const EngineConfig& config) {
    if (frame.h <= 0 || frame.w <= 0 || frame.c <= 0) {
        return {ErrorCode::dimension_mismatch, "frame dims must be positive"};
    }
    const auto expected =
        static_cast<std::size_t>(frame.h) * static_cast<std::size_t>(frame.w) * frame.c;
    if (frame.data.size() != expected) {
        return {ErrorCode::dimension_mismatch,
                "data length " + std::to_string(frame.data.size()) + " != h*w*c " +
                    std::to_string(expected)};
    }
    if (frame.h % config.pool_dh != 0 || frame.w % config.pool_dw != 0) {
        return {ErrorCode::pooling_divisibility, "pool window does not divide frame dims"};
    }
    if (!(frame.predicted_iou >= 0.0f && frame.predicted_iou <= 1.0f)) {
        return {ErrorCode::iou_out_of_range, "predicted iou outside [0,1]"};
    }
    return {};
}

}  // namespace memshrink
