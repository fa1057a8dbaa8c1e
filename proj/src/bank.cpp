#include "memshrink/bank.hpp"

namespace memshrink {

const char* to_string(AdmitReason r) {
    switch (r) {
        case AdmitReason::admitted_gt: return "admitted_gt";
        case AdmitReason::admitted_motion: return "admitted_motion";
        case AdmitReason::rejected_absent: return "rejected_absent";
        case AdmitReason::rejected_low_iou: return "rejected_low_iou";
    }
    return "?";
}

AdmissionDecision MemoryBank::gate_check(const FeatureFrame& frame, const EngineConfig& config) {
    if (frame.is_prompt) {
        return {true, AdmitReason::admitted_gt, std::nullopt};
    }
    // Absence gate first; the reason code reflects the first failing gate.
    if (config.absence_filter && !frame.object_present) {
        return {false, AdmitReason::rejected_absent, std::nullopt};
    }
    // "Above the threshold" is pinned as iou >= theta so theta = 1.0 still
    // admits perfect predictions.
    if (config.iou_gate && frame.predicted_iou < config.iou_threshold) {
        return {false, AdmitReason::rejected_low_iou, std::nullopt};
    }
    return {true, AdmitReason::admitted_motion, std::nullopt};
}

AdmissionDecision MemoryBank::admit(const FeatureFrame& frame, CompressedFrame pooled) {
    if (!dims_pinned_) {
        dims_pinned_ = true;
        pinned_h_ = pooled.pooled_h;
        pinned_w_ = pooled.pooled_w;
        pinned_c_ = pooled.c;
    } else if (pooled.pooled_h != pinned_h_ || pooled.pooled_w != pinned_w_ ||
               pooled.c != pinned_c_) {
        throw EngineError(ErrorCode::dims_mismatch,
                          "frame " + std::to_string(frame.frame_index) +
                              " does not match the bank's pinned dims");
    }

    AdmissionDecision decision = gate_check(frame, config_);
    if (!decision.admitted) {
        if (decision.reason == AdmitReason::rejected_absent) {
            ++rejected_absent_count;
        } else {
            ++rejected_iou_count;
        }
        return decision;
    }

    if (frame.is_prompt) {
        if (gt_) {
            throw EngineError(ErrorCode::gt_already_set,
                              "a GT frame is already stored in the bank");
        }
        pooled.is_gt = true;
        gt_ = std::move(pooled);
        ++admitted_count;
        return decision;
    }

    if (static_cast<int>(motion_.size()) >= config_.bank_capacity - 1 && !motion_.empty()) {
        decision.evicted_frame_index = motion_.front().frame_index;
        motion_.pop_front();
    }
    if (config_.bank_capacity > 1) {
        motion_.push_back(std::move(pooled));
    }
    ++admitted_count;
    return decision;
}

std::vector<CompressedFrame> MemoryBank::snapshot_frames() const {
    std::vector<CompressedFrame> out;
    out.reserve(motion_.size() + 1);
    if (gt_) {
        out.push_back(*gt_);
    }
    out.insert(out.end(), motion_.begin(), motion_.end());
    return out;
}

}  // namespace memshrink
