#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace memshrink {

enum class ErrorCode {
    dimension_mismatch,
    pooling_divisibility,
    iou_out_of_range,
    shape_mismatch,
    empty_motion_set,
    missing_gt_frame,
    gt_already_set,
    dims_mismatch,
    empty_memory,
    channel_mismatch,
    channels_too_small,
    blob_too_large,
    bad_config,
    io_error,
    bad_format,
};

struct EngineError : std::runtime_error {
    ErrorCode code;
    EngineError(ErrorCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

enum class PoolingKind { average, max };
enum class Anchor { previous, gt };
enum class Scope { global, per_frame };

enum class TemporalStrategy {
    topn_select,
    no_tmc,
    gt_plus_last,
    first_plus_last,
    moving_average,
    retain_gt_first_last,
};

const char* to_string(PoolingKind k);
const char* to_string(Anchor a);
const char* to_string(Scope s);
const char* to_string(TemporalStrategy s);

// One frame's dense feature grid plus the quality metadata used for admission.
struct FeatureFrame {
    std::int64_t frame_index = 0;
    int h = 0;
    int w = 0;
    int c = 0;
    std::vector<float> data;  // row-major (h, w, c)
    float predicted_iou = 1.0f;
    bool object_present = true;
    bool is_prompt = false;

    float at(int r, int col, int ch) const {
        return data[(static_cast<std::size_t>(r) * w + col) * c + ch];
    }
    float& at(int r, int col, int ch) {
        return data[(static_cast<std::size_t>(r) * w + col) * c + ch];
    }
};

// Pooled token grid stored in the memory bank.
struct CompressedFrame {
    std::int64_t frame_index = 0;
    int pooled_h = 0;
    int pooled_w = 0;
    int c = 0;
    std::vector<float> tokens;  // row-major (pooled_h, pooled_w, c)
    bool is_gt = false;

    const float* token(int r, int col) const {
        return tokens.data() + (static_cast<std::size_t>(r) * pooled_w + col) * c;
    }
    float* token(int r, int col) {
        return tokens.data() + (static_cast<std::size_t>(r) * pooled_w + col) * c;
    }
    std::int64_t token_count() const {
        return static_cast<std::int64_t>(pooled_h) * pooled_w;
    }
};

// Position of a token in the pooled grid of a particular frame.
struct TokenCoord {
    std::int64_t frame_index = 0;
    int row = 0;
    int col = 0;

    friend auto operator<=>(const TokenCoord&, const TokenCoord&) = default;
};

struct ScoredToken {
    TokenCoord coord;
    std::vector<float> features;
    double similarity = 0.0;
};

// Attention-ready memory: GT token block first, then the selected motion tokens.
struct MemorySnapshot {
    struct Entry {
        TokenCoord coord;
        std::vector<float> features;
    };
    std::vector<Entry> gt_tokens;
    std::vector<Entry> selected_tokens;
    int channels = 0;

    std::int64_t total_tokens() const {
        return static_cast<std::int64_t>(gt_tokens.size() + selected_tokens.size());
    }
};

struct EngineConfig {
    int pool_dh = 2;
    int pool_dw = 2;
    PoolingKind pooling = PoolingKind::average;
    int bank_capacity = 7;  // total frames including the GT frame
    std::optional<std::int64_t> selection_budget;  // nullopt = AUTO (pooled_h * pooled_w)
    Anchor anchor = Anchor::previous;
    Scope scope = Scope::global;
    TemporalStrategy strategy = TemporalStrategy::topn_select;
    float iou_threshold = 0.5f;
    bool absence_filter = true;
    bool iou_gate = true;
    bool position_encoding = true;

    std::int64_t resolved_budget(int pooled_h, int pooled_w) const {
        return selection_budget ? *selection_budget
                                : static_cast<std::int64_t>(pooled_h) * pooled_w;
    }

    // Throws EngineError(bad_config) on out-of-range fields.
    void validate() const;
};

struct ValidationResult {
    std::optional<ErrorCode> error;
    std::string message;

    bool ok() const { return !error.has_value(); }
};

ValidationResult validate_frame(const FeatureFrame& frame, const EngineConfig& config);

}  // namespace memshrink
