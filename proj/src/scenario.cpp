#include "memshrink/scenario.hpp"

#include <algorithm>
#include <map>

#include "memshrink/attention.hpp"
#include "memshrink/pooling.hpp"
#include "memshrink/rng.hpp"
#include "memshrink/temporal.hpp"

namespace memshrink {

namespace {

// Toroidal Chebyshev distance between pooled cells.
int wrap_dist(int a, int b, int period) {
    int d = std::abs(a - b) % period;
    return std::min(d, period - d);
}

bool in_window(const std::vector<std::pair<int, int>>& windows, int frame) {
    for (const auto& [start, end] : windows) {
        if (frame >= start && frame <= end) {
            return true;
        }
    }
    return false;
}

}  // namespace

GeneratedStream generate_stream(const ScenarioSpec& spec, const EngineConfig& config) {
    if (spec.h <= 0 || spec.w <= 0 || spec.c <= 0 || spec.frame_count <= 0) {
        throw EngineError(ErrorCode::bad_config, "scenario dims must be positive");
    }
    if (spec.h % config.pool_dh != 0 || spec.w % config.pool_dw != 0) {
        throw EngineError(ErrorCode::pooling_divisibility,
                          "scenario dims not divisible by the pool window");
    }
    const int ph = spec.h / config.pool_dh;
    const int pw = spec.w / config.pool_dw;
    const int side = 2 * spec.blob.radius + 1;
    if (spec.blob.radius < 0 || side > ph || side > pw) {
        throw EngineError(ErrorCode::blob_too_large,
                          "blob of side " + std::to_string(side) +
                              " does not fit the pooled grid");
    }

    Xoshiro256pp rng(spec.seed);

    // Static background field, drawn once and reused for every frame.
    std::vector<float> background(static_cast<std::size_t>(spec.h) * spec.w * spec.c);
    for (auto& v : background) {
        v = static_cast<float>(spec.noise_sigma * rng.next_gaussian());
    }

    // Blob texture, indexed by offset from the blob center and channel. Values
    // vary per channel and per cell so cells inside the moving blob change
    // their feature direction as the blob passes over them.
    std::vector<float> texture(static_cast<std::size_t>(side) * side * spec.c);
    for (auto& v : texture) {
        v = static_cast<float>(spec.blob.amplitude * rng.next_uniform(0.5, 1.5));
    }

    GeneratedStream out;
    out.pooled_h = ph;
    out.pooled_w = pw;
    out.frames.reserve(spec.frame_count);
    out.moved_masks.reserve(spec.frame_count);

    std::vector<std::uint8_t> prev_occ(static_cast<std::size_t>(ph) * pw, 0);
    for (int f = 0; f < spec.frame_count; ++f) {
        const int center_r =
            ((ph / 2 + f * spec.blob.vel_r) % ph + ph) % ph;
        const int center_c =
            ((pw / 2 + f * spec.blob.vel_c) % pw + pw) % pw;

        std::vector<std::uint8_t> occ(static_cast<std::size_t>(ph) * pw, 0);
        for (int r = 0; r < ph; ++r) {
            for (int col = 0; col < pw; ++col) {
                occ[static_cast<std::size_t>(r) * pw + col] =
                    wrap_dist(r, center_r, ph) <= spec.blob.radius &&
                    wrap_dist(col, center_c, pw) <= spec.blob.radius;
            }
        }

        FeatureFrame frame;
        frame.frame_index = f;
        frame.h = spec.h;
        frame.w = spec.w;
        frame.c = spec.c;
        frame.is_prompt = (f == 0);
        frame.object_present = !in_window(spec.occlusion_windows, f);
        float iou = spec.iou_schedule.empty()
                        ? spec.iou_constant
                        : spec.iou_schedule[std::min<std::size_t>(f, spec.iou_schedule.size() - 1)];
        frame.predicted_iou = std::clamp(iou, 0.0f, 1.0f);
        frame.data = background;
        for (int r = 0; r < spec.h; ++r) {
            const int cell_r = r / config.pool_dh;
            for (int col = 0; col < spec.w; ++col) {
                const int cell_c = col / config.pool_dw;
                if (!occ[static_cast<std::size_t>(cell_r) * pw + cell_c]) {
                    continue;
                }
                // Offset of this pooled cell from the blob center, toroidal.
                const int off_r =
                    ((cell_r - center_r + spec.blob.radius) % ph + ph) % ph;
                const int off_c =
                    ((cell_c - center_c + spec.blob.radius) % pw + pw) % pw;
                const float* tex =
                    texture.data() + (static_cast<std::size_t>(off_r) * side + off_c) * spec.c;
                float* px = frame.data.data() + (static_cast<std::size_t>(r) * spec.w + col) * spec.c;
                for (int k = 0; k < spec.c; ++k) {
                    px[k] += tex[k];
                }
            }
        }
        out.frames.push_back(std::move(frame));

        std::vector<std::uint8_t> moved(static_cast<std::size_t>(ph) * pw, 0);
        if (f > 0) {
            for (std::size_t i = 0; i < moved.size(); ++i) {
                moved[i] = occ[i] != prev_occ[i];
            }
        }
        out.moved_masks.push_back(std::move(moved));
        prev_occ = std::move(occ);
    }
    return out;
}

RunMetrics run_pipeline(const std::vector<FeatureFrame>& stream,
                        const std::vector<std::vector<std::uint8_t>>* moved_masks,
                        const EngineConfig& config) {
    if (stream.empty()) {
        throw EngineError(ErrorCode::bad_config, "empty stream");
    }
    if (!stream.front().is_prompt) {
        throw EngineError(ErrorCode::missing_gt_frame, "frame 0 must be the prompted frame");
    }
    config.validate();

    const int h = stream.front().h;
    const int w = stream.front().w;

    MemoryBank bank(config);
    RunMetrics metrics;
    metrics.frames.reserve(stream.size());

    double ratio_sum = 0.0;
    double recall_sum = 0.0;

    for (const auto& frame : stream) {
        if (frame.h != h || frame.w != w || frame.c != stream.front().c) {
            throw EngineError(ErrorCode::dims_mismatch, "stream frames must share dims");
        }
        const auto validation = validate_frame(frame, config);
        if (!validation.ok()) {
            throw EngineError(*validation.error, validation.message);
        }

        CompressedFrame pooled = pool_frame(frame, config);
        const AdmissionDecision decision = bank.admit(frame, pooled);

        FrameMetrics fm;
        fm.frame_index = frame.frame_index;
        fm.admitted = decision.admitted;
        fm.reason = decision.reason;

        const auto bank_frames = bank.snapshot_frames();
        if (!bank_frames.empty()) {
            const SelectionResult sel = assemble_memory(bank_frames, config);
            fm.memory_tokens = sel.snapshot.total_tokens();

            const std::int64_t baseline =
                static_cast<std::int64_t>(bank_frames.size()) * h * w;
            const AttentionOutput attn = cross_attend(pooled, sel.snapshot, config, baseline);
            fm.compression_ratio = attn.cost.compression_ratio;
            fm.mac_count = attn.cost.mac_count;

            if (moved_masks != nullptr) {
                std::int64_t hits = 0;
                std::int64_t available = 0;
                for (const auto& bf : bank_frames) {
                    if (bf.is_gt) {
                        continue;
                    }
                    const auto idx = static_cast<std::size_t>(bf.frame_index);
                    if (idx < moved_masks->size()) {
                        for (const auto cell : (*moved_masks)[idx]) {
                            available += cell;
                        }
                    }
                }
                for (const auto& entry : sel.snapshot.selected_tokens) {
                    const auto idx = static_cast<std::size_t>(entry.coord.frame_index);
                    if (idx < moved_masks->size()) {
                        const auto& mask = (*moved_masks)[idx];
                        const std::size_t cell =
                            static_cast<std::size_t>(entry.coord.row) * pooled.pooled_w +
                            entry.coord.col;
                        if (cell < mask.size() && mask[cell]) {
                            ++hits;
                        }
                    }
                }
                fm.motion_recall =
                    static_cast<double>(hits) / static_cast<double>(std::max<std::int64_t>(1, available));
            }
        }

        ratio_sum += fm.compression_ratio;
        recall_sum += fm.motion_recall;
        metrics.total_macs += fm.mac_count;
        metrics.frames.push_back(fm);
    }

    const auto n = static_cast<double>(metrics.frames.size());
    metrics.mean_ratio = ratio_sum / n;
    metrics.mean_recall = recall_sum / n;
    return metrics;
}

}  // namespace memshrink
