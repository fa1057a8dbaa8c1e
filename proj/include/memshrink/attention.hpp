#pragma once

#include "memshrink/types.hpp"

namespace memshrink {

struct CostReport {
    std::int64_t query_tokens = 0;
    std::int64_t memory_tokens = 0;
    std::int64_t mac_count = 0;  // 2 * N_q * N_kv * c: QK^T plus weighted-V
    double compression_ratio = 0.0;  // N_kv over the uncompressed t*h*w bank
};

struct AttentionOutput {
    std::vector<float> values;  // row-major (N_q, c)
    std::int64_t n_q = 0;
    int channels = 0;
    double weights_checksum = 0.0;  // sum of all attention weights, ~ N_q
    CostReport cost;
};

// Three-axis sinusoidal code over (frame_index, row, col): channels split into
// three contiguous even-sized groups, standard interleaved sin/cos with
// geometric frequency bands base 10000 inside each group.
std::vector<float> position_encode(const TokenCoord& coord, int c);

// softmax(Q K^T / sqrt(c)) V with row-max stabilization. PE (when enabled) is
// added to Q and K only; V stays raw so single-key attention returns the
// memory value exactly. uncompressed_baseline is the t*h*w token count the
// compression ratio is reported against.
AttentionOutput cross_attend(const CompressedFrame& query, const MemorySnapshot& memory,
                             const EngineConfig& config, std::int64_t uncompressed_baseline);

// Closed-form token/cost accounting per strategy, no attention executed.
// Queries are one pooled frame; t_actual is the number of frames in the bank.
CostReport cost_of(const EngineConfig& config, int h, int w, int c, int t_actual,
                   TemporalStrategy strategy);

}  // namespace memshrink
