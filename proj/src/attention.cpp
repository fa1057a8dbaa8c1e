#include "memshrink/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "memshrink/pooling.hpp"

namespace memshrink {

namespace {

// Group sizes for the three coordinate axes: as equal as possible, each even.
void axis_groups(int c, int sizes[3]) {
    const int pairs = c / 2;
    const int base = pairs / 3;
    const int extra = pairs % 3;
    for (int g = 0; g < 3; ++g) {
        sizes[g] = 2 * (base + (g < extra ? 1 : 0));
    }
}

void encode_axis(double pos, int group_size, float* out) {
    for (int j = 0; 2 * j < group_size; ++j) {
        const double freq = std::pow(10000.0, (2.0 * j) / group_size);
        out[2 * j] = static_cast<float>(std::sin(pos / freq));
        out[2 * j + 1] = static_cast<float>(std::cos(pos / freq));
    }
}

std::int64_t selected_frames_for(TemporalStrategy strategy, int t_actual) {
    switch (strategy) {
        case TemporalStrategy::no_tmc: return t_actual;
        case TemporalStrategy::gt_plus_last:
        case TemporalStrategy::first_plus_last: return std::min(t_actual, 2);
        case TemporalStrategy::moving_average: return 1;
        case TemporalStrategy::retain_gt_first_last: return std::min(t_actual, 3);
        case TemporalStrategy::topn_select: break;
    }
    return 0;  // handled separately
}

}  // namespace

std::vector<float> position_encode(const TokenCoord& coord, int c) {
    if (c < 6 || c % 2 != 0) {
        throw EngineError(ErrorCode::channels_too_small,
                          "position encoding needs even channel count >= 6");
    }
    int sizes[3];
    axis_groups(c, sizes);
    const double axes[3] = {static_cast<double>(coord.frame_index),
                            static_cast<double>(coord.row), static_cast<double>(coord.col)};
    std::vector<float> out(static_cast<std::size_t>(c));
    int offset = 0;
    for (int g = 0; g < 3; ++g) {
        encode_axis(axes[g], sizes[g], out.data() + offset);
        offset += sizes[g];
    }
    return out;
}

AttentionOutput cross_attend(const CompressedFrame& query, const MemorySnapshot& memory,
                             const EngineConfig& config, std::int64_t uncompressed_baseline) {
    const std::int64_t n_kv = memory.total_tokens();
    if (n_kv == 0) {
        throw EngineError(ErrorCode::empty_memory, "cross-attention needs a nonempty memory");
    }
    if (memory.channels != query.c) {
        throw EngineError(ErrorCode::channel_mismatch, "query and memory channel counts differ");
    }
    const int c = query.c;
    const std::int64_t n_q = query.token_count();

    // Gather keys (optionally PE-shifted) and raw values, GT block first.
    std::vector<const MemorySnapshot::Entry*> entries;
    entries.reserve(static_cast<std::size_t>(n_kv));
    for (const auto& e : memory.gt_tokens) entries.push_back(&e);
    for (const auto& e : memory.selected_tokens) entries.push_back(&e);

    std::vector<float> keys(static_cast<std::size_t>(n_kv) * c);
    for (std::int64_t i = 0; i < n_kv; ++i) {
        const auto& e = *entries[i];
        float* dst = keys.data() + i * c;
        std::copy(e.features.begin(), e.features.end(), dst);
        if (config.position_encoding) {
            const auto pe = position_encode(e.coord, c);
            for (int k = 0; k < c; ++k) dst[k] += pe[k];
        }
    }

    AttentionOutput out;
    out.n_q = n_q;
    out.channels = c;
    out.values.resize(static_cast<std::size_t>(n_q) * c);

    const double scale = 1.0 / std::sqrt(static_cast<double>(c));
    std::vector<double> q_row(static_cast<std::size_t>(c));
    std::vector<double> logits(static_cast<std::size_t>(n_kv));
    std::vector<double> acc(static_cast<std::size_t>(c));
    double checksum = 0.0;

    for (std::int64_t qi = 0; qi < n_q; ++qi) {
        const int qr = static_cast<int>(qi) / query.pooled_w;
        const int qc = static_cast<int>(qi) % query.pooled_w;
        const float* q = query.token(qr, qc);
        for (int k = 0; k < c; ++k) q_row[k] = q[k];
        if (config.position_encoding) {
            const auto pe = position_encode(TokenCoord{query.frame_index, qr, qc}, c);
            for (int k = 0; k < c; ++k) q_row[k] += pe[k];
        }

        double row_max = -std::numeric_limits<double>::infinity();
        for (std::int64_t i = 0; i < n_kv; ++i) {
            const float* key = keys.data() + i * c;
            double dot = 0.0;
            for (int k = 0; k < c; ++k) dot += q_row[k] * key[k];
            logits[i] = dot * scale;
            row_max = std::max(row_max, logits[i]);
        }
        double denom = 0.0;
        for (std::int64_t i = 0; i < n_kv; ++i) {
            logits[i] = std::exp(logits[i] - row_max);
            denom += logits[i];
        }
        float* dst = out.values.data() + qi * c;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::int64_t i = 0; i < n_kv; ++i) {
            const double weight = logits[i] / denom;
            checksum += weight;
            const auto& v = entries[i]->features;
            for (int k = 0; k < c; ++k) acc[k] += weight * v[k];
        }
        for (int k = 0; k < c; ++k) dst[k] = static_cast<float>(acc[k]);
    }

    out.weights_checksum = checksum;
    out.cost.query_tokens = n_q;
    out.cost.memory_tokens = n_kv;
    out.cost.mac_count = 2 * n_q * n_kv * c;
    out.cost.compression_ratio =
        uncompressed_baseline > 0
            ? static_cast<double>(n_kv) / static_cast<double>(uncompressed_baseline)
            : 0.0;
    return out;
}

CostReport cost_of(const EngineConfig& config, int h, int w, int c, int t_actual,
                   TemporalStrategy strategy) {
    const std::int64_t per_frame = pooled_token_count(h, w, config);
    const int ph = h / config.pool_dh;
    const int pw = w / config.pool_dw;

    std::int64_t n_kv = 0;
    if (strategy == TemporalStrategy::topn_select) {
        const std::int64_t budget = config.resolved_budget(ph, pw);
        n_kv = per_frame + std::min<std::int64_t>(budget, (t_actual - 1) * per_frame);
    } else {
        n_kv = selected_frames_for(strategy, t_actual) * per_frame;
    }

    CostReport report;
    report.query_tokens = per_frame;
    report.memory_tokens = n_kv;
    report.mac_count = 2 * report.query_tokens * n_kv * c;
    report.compression_ratio = static_cast<double>(n_kv) /
                               (static_cast<double>(t_actual) * h * w);
    return report;
}

}  // namespace memshrink
