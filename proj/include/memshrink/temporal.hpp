#pragma once

#include "memshrink/types.hpp"

namespace memshrink {

struct SelectionResult {
    MemorySnapshot snapshot;
    std::vector<ScoredToken> scores;  // all candidates, for diagnostics
    std::int64_t budget_used = 0;
};

// Cosine similarity between two c-dim tokens; tokens with norm < 1e-12 score
// 1.0 so degenerate features rank last for selection.
double cosine_similarity(const float* u, const float* v, int c);

// One score per motion-frame grid cell. frames must be ordered GT first.
// anchor=previous compares cell (r,c) of frame k against frame k-1 in the
// sequence (the earliest motion frame compares against GT); anchor=gt compares
// every motion token against the GT token at the same cell.
std::vector<ScoredToken> similarity_scores(const std::vector<CompressedFrame>& frames,
                                           Anchor anchor);

// Top-n by ascending similarity, ties broken by ascending (frame, row, col).
// scope=per_frame splits the budget into floor(n/m) per motion frame plus one
// extra for each of the (n mod m) most recent frames.
SelectionResult select_topn(const std::vector<ScoredToken>& scores,
                            const std::vector<CompressedFrame>& frames, std::int64_t n,
                            Scope scope);

// Strategy dispatch over the whole bank (GT first, motion oldest->newest).
SelectionResult assemble_memory(const std::vector<CompressedFrame>& bank_frames,
                                const EngineConfig& config);

}  // namespace memshrink
