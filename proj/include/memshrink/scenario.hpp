#pragma once

#include "memshrink/bank.hpp"
#include "memshrink/types.hpp"

namespace memshrink {

struct BlobSpec {
    int radius = 3;       // in pooled cells, Chebyshev
    int vel_r = 1;        // per-frame motion in pooled cells, wraps toroidally
    int vel_c = 1;
    float amplitude = 1.0f;
};

struct ScenarioSpec {
    int h = 64;
    int w = 64;
    int c = 16;
    int frame_count = 40;
    std::uint64_t seed = 42;
    BlobSpec blob;
    float noise_sigma = 0.1f;
    std::vector<std::pair<int, int>> occlusion_windows;  // inclusive frame ranges
    std::vector<float> iou_schedule;                     // per-frame; empty = constant
    float iou_constant = 1.0f;
};

struct GeneratedStream {
    std::vector<FeatureFrame> frames;
    // Per frame, pooled-grid mask of cells whose blob occupancy changed vs the
    // previous frame (frame 0's mask is empty). Row-major pooled_h * pooled_w.
    std::vector<std::vector<std::uint8_t>> moved_masks;
    int pooled_h = 0;
    int pooled_w = 0;
};

// Deterministic synthetic stream: a static Gaussian background field plus a
// textured blob that moves over the pooled grid. The background is drawn once
// per stream so unchanged cells stay bit-identical across frames, matching the
// temporal-redundancy premise the selector exploits.
GeneratedStream generate_stream(const ScenarioSpec& spec, const EngineConfig& config);

struct FrameMetrics {
    std::int64_t frame_index = 0;
    bool admitted = false;
    AdmitReason reason = AdmitReason::admitted_motion;
    std::int64_t memory_tokens = 0;
    double compression_ratio = 0.0;
    double motion_recall = 0.0;
    std::int64_t mac_count = 0;
};

struct RunMetrics {
    std::vector<FrameMetrics> frames;
    double mean_ratio = 0.0;
    double mean_recall = 0.0;
    std::int64_t total_macs = 0;
};

// Full per-frame loop: pool -> gate/admit -> assemble memory -> cross-attend
// the current pooled frame against it. moved_masks may be null (stream input
// without ground truth); recall is then reported as 0.
RunMetrics run_pipeline(const std::vector<FeatureFrame>& stream,
                        const std::vector<std::vector<std::uint8_t>>* moved_masks,
                        const EngineConfig& config);

}  // namespace memshrink
