#include "memshrink/temporal.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace memshrink {

namespace {

constexpr double kNormFloor = 1e-12;

void require_same_dims(const std::vector<CompressedFrame>& frames) {
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].pooled_h != frames[0].pooled_h ||
            frames[i].pooled_w != frames[0].pooled_w || frames[i].c != frames[0].c) {
            throw EngineError(ErrorCode::shape_mismatch,
                              "bank frames disagree on pooled dims or channels");
        }
    }
}

bool score_order(const ScoredToken& a, const ScoredToken& b) {
    if (a.similarity != b.similarity) {
        return a.similarity < b.similarity;
    }
    return a.coord < b.coord;
}

void append_frame_tokens(std::vector<MemorySnapshot::Entry>& out, const CompressedFrame& frame) {
    for (int r = 0; r < frame.pooled_h; ++r) {
        for (int col = 0; col < frame.pooled_w; ++col) {
            const float* tok = frame.token(r, col);
            out.push_back({TokenCoord{frame.frame_index, r, col},
                           std::vector<float>(tok, tok + frame.c)});
        }
    }
}

MemorySnapshot gt_only_snapshot(const CompressedFrame& gt) {
    MemorySnapshot snap;
    snap.channels = gt.c;
    append_frame_tokens(snap.gt_tokens, gt);
    return snap;
}

const CompressedFrame& require_gt(const std::vector<CompressedFrame>& bank) {
    if (bank.empty() || !bank.front().is_gt) {
        throw EngineError(ErrorCode::missing_gt_frame, "strategy requires a GT frame in the bank");
    }
    return bank.front();
}

}  // namespace

double cosine_similarity(const float* u, const float* v, int c) {
    double dot = 0.0;
    double nu = 0.0;
    double nv = 0.0;
    for (int k = 0; k < c; ++k) {
        dot += static_cast<double>(u[k]) * v[k];
        nu += static_cast<double>(u[k]) * u[k];
        nv += static_cast<double>(v[k]) * v[k];
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    if (nu < kNormFloor || nv < kNormFloor) {
        return 1.0;
    }
    return dot / (nu * nv);
}

std::vector<ScoredToken> similarity_scores(const std::vector<CompressedFrame>& frames,
                                           Anchor anchor) {
    if (frames.size() < 2) {
        throw EngineError(ErrorCode::empty_motion_set, "need at least one motion frame to score");
    }
    require_same_dims(frames);

    std::vector<ScoredToken> out;
    out.reserve((frames.size() - 1) * frames[0].token_count());
    for (std::size_t k = 1; k < frames.size(); ++k) {
        const CompressedFrame& cur = frames[k];
        const CompressedFrame& ref = (anchor == Anchor::previous) ? frames[k - 1] : frames[0];
        for (int r = 0; r < cur.pooled_h; ++r) {
            for (int col = 0; col < cur.pooled_w; ++col) {
                const float* tok = cur.token(r, col);
                ScoredToken st;
                st.coord = TokenCoord{cur.frame_index, r, col};
                st.features.assign(tok, tok + cur.c);
                st.similarity = cosine_similarity(tok, ref.token(r, col), cur.c);
                out.push_back(std::move(st));
            }
        }
    }
    return out;
}

SelectionResult select_topn(const std::vector<ScoredToken>& scores,
                            const std::vector<CompressedFrame>& frames, std::int64_t n,
                            Scope scope) {
    if (n < 0) {
        throw EngineError(ErrorCode::bad_config, "selection budget must be >= 0");
    }

    std::vector<ScoredToken> selected;
    const auto total = static_cast<std::int64_t>(scores.size());
    if (n >= total) {
        selected = scores;
    } else if (scope == Scope::global) {
        std::vector<ScoredToken> sorted = scores;
        std::sort(sorted.begin(), sorted.end(), score_order);
        selected.assign(sorted.begin(), sorted.begin() + n);
    } else {
        // Motion frames in bank order; remainder budget goes to the most
        // recent ones.
        std::vector<std::int64_t> motion_ids;
        for (std::size_t i = 1; i < frames.size(); ++i) {
            motion_ids.push_back(frames[i].frame_index);
        }
        const auto m = static_cast<std::int64_t>(motion_ids.size());
        if (m == 0) {
            throw EngineError(ErrorCode::empty_motion_set, "per-frame scope needs motion frames");
        }
        const std::int64_t base = n / m;
        const std::int64_t extras = n % m;
        std::map<std::int64_t, std::int64_t> quota;
        for (std::int64_t i = 0; i < m; ++i) {
            quota[motion_ids[i]] = base + (i >= m - extras ? 1 : 0);
        }
        std::map<std::int64_t, std::vector<ScoredToken>> by_frame;
        for (const auto& st : scores) {
            by_frame[st.coord.frame_index].push_back(st);
        }
        for (auto& [frame_id, cands] : by_frame) {
            std::sort(cands.begin(), cands.end(), score_order);
            const auto take =
                std::min<std::int64_t>(quota[frame_id], static_cast<std::int64_t>(cands.size()));
            selected.insert(selected.end(), cands.begin(), cands.begin() + take);
        }
    }
    std::sort(selected.begin(), selected.end(), score_order);

    SelectionResult result;
    result.scores = scores;
    result.budget_used = static_cast<std::int64_t>(selected.size());
    result.snapshot.channels = frames.empty() ? 0 : frames[0].c;
    if (!frames.empty() && frames.front().is_gt) {
        append_frame_tokens(result.snapshot.gt_tokens, frames.front());
    }
    for (auto& st : selected) {
        result.snapshot.selected_tokens.push_back({st.coord, std::move(st.features)});
    }
    return result;
}

SelectionResult assemble_memory(const std::vector<CompressedFrame>& bank_frames,
                                const EngineConfig& config) {
    if (bank_frames.empty()) {
        throw EngineError(ErrorCode::empty_memory, "cannot assemble memory from an empty bank");
    }
    require_same_dims(bank_frames);

    const int ph = bank_frames[0].pooled_h;
    const int pw = bank_frames[0].pooled_w;
    const int c = bank_frames[0].c;

    SelectionResult result;
    result.snapshot.channels = c;

    switch (config.strategy) {
        case TemporalStrategy::topn_select: {
            const CompressedFrame& gt = require_gt(bank_frames);
            if (bank_frames.size() == 1) {
                result.snapshot = gt_only_snapshot(gt);
                return result;
            }
            const auto scores = similarity_scores(bank_frames, config.anchor);
            return select_topn(scores, bank_frames, config.resolved_budget(ph, pw),
                               config.scope);
        }
        case TemporalStrategy::no_tmc: {
            const CompressedFrame& gt = require_gt(bank_frames);
            append_frame_tokens(result.snapshot.gt_tokens, gt);
            for (std::size_t i = 1; i < bank_frames.size(); ++i) {
                append_frame_tokens(result.snapshot.selected_tokens, bank_frames[i]);
            }
            break;
        }
        case TemporalStrategy::gt_plus_last: {
            const CompressedFrame& gt = require_gt(bank_frames);
            append_frame_tokens(result.snapshot.gt_tokens, gt);
            if (bank_frames.size() > 1) {
                append_frame_tokens(result.snapshot.selected_tokens, bank_frames.back());
            }
            break;
        }
        case TemporalStrategy::first_plus_last: {
            const CompressedFrame& first = bank_frames.front();
            if (first.is_gt) {
                append_frame_tokens(result.snapshot.gt_tokens, first);
            } else {
                append_frame_tokens(result.snapshot.selected_tokens, first);
            }
            if (bank_frames.size() > 1) {
                append_frame_tokens(result.snapshot.selected_tokens, bank_frames.back());
            }
            break;
        }
        case TemporalStrategy::moving_average: {
            // All bank frames (GT included) collapse to one grid by temporal
            // mean; the GT block is absent from the output.
            CompressedFrame averaged;
            averaged.frame_index = bank_frames.back().frame_index;
            averaged.pooled_h = ph;
            averaged.pooled_w = pw;
            averaged.c = c;
            averaged.tokens.resize(static_cast<std::size_t>(ph) * pw * c);
            const double inv_t = 1.0 / static_cast<double>(bank_frames.size());
            for (std::size_t i = 0; i < averaged.tokens.size(); ++i) {
                double sum = 0.0;
                for (const auto& frame : bank_frames) {
                    sum += frame.tokens[i];
                }
                averaged.tokens[i] = static_cast<float>(sum * inv_t);
            }
            append_frame_tokens(result.snapshot.selected_tokens, averaged);
            break;
        }
        case TemporalStrategy::retain_gt_first_last: {
            const CompressedFrame& gt = require_gt(bank_frames);
            append_frame_tokens(result.snapshot.gt_tokens, gt);
            if (bank_frames.size() > 1) {
                append_frame_tokens(result.snapshot.selected_tokens, bank_frames[1]);
            }
            if (bank_frames.size() > 2) {
                append_frame_tokens(result.snapshot.selected_tokens, bank_frames.back());
            }
            break;
        }
    }
    result.budget_used = static_cast<std::int64_t>(result.snapshot.selected_tokens.size());
    return result;
}

}  // namespace memshrink
