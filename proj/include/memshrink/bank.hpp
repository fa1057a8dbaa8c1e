#pragma once

#include <deque>

#include "memshrink/types.hpp"

namespace memshrink {

enum class AdmitReason {
    admitted_gt,
    admitted_motion,
    rejected_absent,
    rejected_low_iou,
};

const char* to_string(AdmitReason r);

struct AdmissionDecision {
    bool admitted = false;
    AdmitReason reason = AdmitReason::admitted_motion;
    std::optional<std::int64_t> evicted_frame_index;
};

// Streaming memory bank: the prompted GT frame is permanent, motion frames
// pass the absence and IoU gates and rotate FIFO within capacity-1 slots.
class MemoryBank {
public:
    explicit MemoryBank(EngineConfig config) : config_(std::move(config)) {
        config_.validate();
    }

    // Pure gate preview: the decision admit() would make, without mutation.
    static AdmissionDecision gate_check(const FeatureFrame& frame, const EngineConfig& config);

    AdmissionDecision admit(const FeatureFrame& frame, CompressedFrame pooled);

    // GT first, then motion frames oldest -> newest.
    std::vector<CompressedFrame> snapshot_frames() const;

    const std::optional<CompressedFrame>& gt_entry() const { return gt_; }
    const std::deque<CompressedFrame>& motion_entries() const { return motion_; }
    std::int64_t frame_count() const {
        return static_cast<std::int64_t>(motion_.size()) + (gt_ ? 1 : 0);
    }

    std::int64_t admitted_count = 0;
    std::int64_t rejected_absent_count = 0;
    std::int64_t rejected_iou_count = 0;

private:
    EngineConfig config_;
    std::optional<CompressedFrame> gt_;
    std::deque<CompressedFrame> motion_;
    bool dims_pinned_ = false;
    int pinned_h_ = 0, pinned_w_ = 0, pinned_c_ = 0;
};

}  // namespace memshrink
