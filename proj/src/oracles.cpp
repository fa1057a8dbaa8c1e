#include "memshrink/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "memshrink/attention.hpp"
#include "memshrink/bank.hpp"
#include "memshrink/pooling.hpp"
#include "memshrink/rng.hpp"

namespace memshrink {
namespace oracle {

CompressedFrame pool_frame_reference(const FeatureFrame& frame, const EngineConfig& config) {
    CompressedFrame out;
    out.frame_index = frame.frame_index;
    out.pooled_h = frame.h / config.pool_dh;
    out.pooled_w = frame.w / config.pool_dw;
    out.c = frame.c;
    out.is_gt = frame.is_prompt;
    out.tokens.assign(static_cast<std::size_t>(out.pooled_h) * out.pooled_w * frame.c, 0.0f);

    for (int i = 0; i < out.pooled_h; ++i) {
        for (int j = 0; j < out.pooled_w; ++j) {
            for (int k = 0; k < frame.c; ++k) {
                double sum = 0.0;
                double best = -1e300;
                int count = 0;
                for (int r = 0; r < config.pool_dh; ++r) {
                    for (int col = 0; col < config.pool_dw; ++col) {
                        const double v = frame.at(i * config.pool_dh + r, j * config.pool_dw + col, k);
                        sum += v;
                        best = std::max(best, v);
                        ++count;
                    }
                }
                out.token(i, j)[k] = config.pooling == PoolingKind::average
                                         ? static_cast<float>(sum / count)
                                         : static_cast<float>(best);
            }
        }
    }
    return out;
}

std::set<TokenCoord> select_global_reference(const std::vector<ScoredToken>& scores,
                                             std::int64_t n) {
    std::vector<std::pair<double, TokenCoord>> pairs;
    pairs.reserve(scores.size());
    for (const auto& st : scores) {
        pairs.emplace_back(st.similarity, st.coord);
    }
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    std::set<TokenCoord> out;
    for (std::int64_t i = 0; i < std::min<std::int64_t>(n, pairs.size()); ++i) {
        out.insert(pairs[i].second);
    }
    return out;
}

std::set<TokenCoord> select_per_frame_reference(const std::vector<ScoredToken>& scores,
                                                const std::vector<std::int64_t>& motion_order,
                                                std::int64_t n) {
    if (n >= static_cast<std::int64_t>(scores.size())) {
        std::set<TokenCoord> out;
        for (const auto& st : scores) out.insert(st.coord);
        return out;
    }
    const auto m = static_cast<std::int64_t>(motion_order.size());
    std::map<std::int64_t, std::int64_t> quota;
    for (std::int64_t i = 0; i < m; ++i) {
        quota[motion_order[i]] = n / m + (i >= m - n % m ? 1 : 0);
    }
    std::map<std::int64_t, std::vector<std::pair<double, TokenCoord>>> by_frame;
    for (const auto& st : scores) {
        by_frame[st.coord.frame_index].emplace_back(st.similarity, st.coord);
    }
    std::set<TokenCoord> out;
    for (auto& [frame_id, pairs] : by_frame) {
        std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first < b.first;
            return a.second < b.second;
        });
        const auto take = std::min<std::int64_t>(quota[frame_id], pairs.size());
        for (std::int64_t i = 0; i < take; ++i) {
            out.insert(pairs[i].second);
        }
    }
    return out;
}

void BankModel::step(const FeatureFrame& frame, const EngineConfig& config) {
    if (frame.is_prompt) {
        gt_index = frame.frame_index;
        return;
    }
    if (config.absence_filter && !frame.object_present) {
        return;
    }
    if (config.iou_gate && frame.predicted_iou < config.iou_threshold) {
        return;
    }
    motion_indices.push_back(frame.frame_index);
    while (static_cast<int>(motion_indices.size()) > config.bank_capacity - 1) {
        motion_indices.erase(motion_indices.begin());
    }
}

std::vector<double> dense_attention_reference(const std::vector<float>& queries,
                                              const std::vector<float>& keys_values,
                                              std::int64_t n_q, std::int64_t n_kv, int c) {
    std::vector<double> out(static_cast<std::size_t>(n_q) * c, 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(c));
    for (std::int64_t qi = 0; qi < n_q; ++qi) {
        std::vector<double> weights(static_cast<std::size_t>(n_kv));
        double denom = 0.0;
        for (std::int64_t i = 0; i < n_kv; ++i) {
            double dot = 0.0;
            for (int k = 0; k < c; ++k) {
                dot += static_cast<double>(queries[qi * c + k]) * keys_values[i * c + k];
            }
            weights[i] = std::exp(dot * scale);
            denom += weights[i];
        }
        for (std::int64_t i = 0; i < n_kv; ++i) {
            const double wgt = weights[i] / denom;
            for (int k = 0; k < c; ++k) {
                out[qi * c + k] += wgt * keys_values[i * c + k];
            }
        }
    }
    return out;
}

namespace {

FeatureFrame random_frame(Xoshiro256pp& rng, int h, int w, int c, std::int64_t index) {
    FeatureFrame frame;
    frame.frame_index = index;
    frame.h = h;
    frame.w = w;
    frame.c = c;
    frame.data.resize(static_cast<std::size_t>(h) * w * c);
    for (auto& v : frame.data) {
        v = static_cast<float>(rng.next_uniform(-2.0, 2.0));
    }
    return frame;
}

CompressedFrame random_pooled(Xoshiro256pp& rng, int ph, int pw, int c, std::int64_t index,
                              bool is_gt) {
    CompressedFrame frame;
    frame.frame_index = index;
    frame.pooled_h = ph;
    frame.pooled_w = pw;
    frame.c = c;
    frame.is_gt = is_gt;
    frame.tokens.resize(static_cast<std::size_t>(ph) * pw * c);
    for (auto& v : frame.tokens) {
        v = static_cast<float>(rng.next_uniform(-1.0, 1.0));
    }
    return frame;
}

void check_pooling(const OracleCounts& counts, Xoshiro256pp& rng, OracleReport& report,
                   bool inject_fault) {
    for (int i = 0; i < counts.pooling; ++i) {
        EngineConfig config;
        config.pool_dh = 1 + static_cast<int>(rng.next_below(4));
        config.pool_dw = 1 + static_cast<int>(rng.next_below(4));
        config.pooling = (i % 2 == 0) ? PoolingKind::average : PoolingKind::max;
        const int h = config.pool_dh * (1 + static_cast<int>(rng.next_below(16 / config.pool_dh)));
        const int w = config.pool_dw * (1 + static_cast<int>(rng.next_below(16 / config.pool_dw)));
        const int c = 1 + static_cast<int>(rng.next_below(8));
        const FeatureFrame frame = random_frame(rng, h, w, c, i);

        CompressedFrame got = pool_frame(frame, config);
        const CompressedFrame want = pool_frame_reference(frame, config);
        if (inject_fault && i == 0) {
            got.tokens[0] += 0.001f;
        }
        for (std::size_t t = 0; t < got.tokens.size(); ++t) {
            if (config.pooling == PoolingKind::average) {
                const double denom = std::max(1e-12, std::abs(static_cast<double>(want.tokens[t])));
                const double rel = std::abs(got.tokens[t] - want.tokens[t]) / denom;
                report.pooling_avg_max_rel_err = std::max(report.pooling_avg_max_rel_err, rel);
            } else if (got.tokens[t] != want.tokens[t]) {
                ++report.pooling_max_mismatches;
            }
        }
        ++report.pooling_instances;
    }
}

void check_selection(const OracleCounts& counts, Xoshiro256pp& rng, OracleReport& report) {
    for (int i = 0; i < counts.selection; ++i) {
        const int m = 1 + static_cast<int>(rng.next_below(6));
        const int ph = 1 + static_cast<int>(rng.next_below(6));
        const int pw = 1 + static_cast<int>(rng.next_below(6));
        const int c = 2;
        // Tie-heavy score pool: a coarse discrete grid roughly a third of the
        // time makes duplicate scores common.
        const bool coarse = rng.next_below(3) == 0;

        std::vector<CompressedFrame> frames;
        frames.push_back(random_pooled(rng, ph, pw, c, 0, true));
        std::vector<std::int64_t> motion_order;
        for (int f = 1; f <= m; ++f) {
            frames.push_back(random_pooled(rng, ph, pw, c, f, false));
            motion_order.push_back(f);
        }

        std::vector<ScoredToken> scores;
        for (int f = 1; f <= m; ++f) {
            for (int r = 0; r < ph; ++r) {
                for (int col = 0; col < pw; ++col) {
                    ScoredToken st;
                    st.coord = TokenCoord{f, r, col};
                    st.features = {0.0f, 0.0f};
                    st.similarity = coarse ? rng.next_below(4) * 0.25
                                           : rng.next_uniform(-1.0, 1.0);
                    scores.push_back(st);
                }
            }
        }

        const auto total = static_cast<std::int64_t>(scores.size());
        const std::int64_t n = rng.next_below(static_cast<std::uint64_t>(total) + 3);
        const Scope scope = (i % 2 == 0) ? Scope::global : Scope::per_frame;

        const SelectionResult got = select_topn(scores, frames, n, scope);
        const std::set<TokenCoord> want =
            scope == Scope::global ? select_global_reference(scores, n)
                                   : select_per_frame_reference(scores, motion_order, n);

        std::set<TokenCoord> got_set;
        for (const auto& entry : got.snapshot.selected_tokens) {
            got_set.insert(entry.coord);
        }
        if (got_set != want) {
            ++report.selection_mismatches;
        }
        ++report.selection_instances;
    }
}

void check_bank(const OracleCounts& counts, Xoshiro256pp& rng, OracleReport& report) {
    for (int i = 0; i < counts.bank; ++i) {
        EngineConfig config;
        MemoryBank bank(config);
        BankModel model;
        bool mismatch = false;
        for (int f = 0; f < 1000; ++f) {
            FeatureFrame frame;
            frame.frame_index = f;
            frame.h = frame.w = 2;
            frame.c = 1;
            frame.data.assign(4, 0.0f);
            frame.is_prompt = (f == 0);
            frame.object_present = rng.next_below(5) != 0;
            frame.predicted_iou = static_cast<float>(rng.next_double());

            CompressedFrame pooled = pool_frame(frame, config);
            bank.admit(frame, std::move(pooled));
            model.step(frame, config);

            std::vector<std::int64_t> got;
            for (const auto& entry : bank.motion_entries()) {
                got.push_back(entry.frame_index);
            }
            const bool gt_ok =
                bank.gt_entry().has_value() == model.gt_index.has_value() &&
                (!model.gt_index || bank.gt_entry()->frame_index == *model.gt_index);
            if (got != model.motion_indices || !gt_ok ||
                got.size() > static_cast<std::size_t>(config.bank_capacity - 1)) {
                mismatch = true;
            }
        }
        if (mismatch) {
            ++report.bank_mismatches;
        }
        ++report.bank_replays;
    }
}

void check_attention(const OracleCounts& counts, Xoshiro256pp& rng, OracleReport& report) {
    for (int i = 0; i < counts.attention; ++i) {
        EngineConfig config;
        config.pool_dh = config.pool_dw = 1;  // identity compression
        config.strategy = TemporalStrategy::no_tmc;
        config.absence_filter = false;
        config.iou_gate = false;
        config.position_encoding = false;

        const int c = 2 + static_cast<int>(rng.next_below(31));
        const int qh = 1 + static_cast<int>(rng.next_below(8));
        const int qw = 1 + static_cast<int>(rng.next_below(8));
        const int mh = 1 + static_cast<int>(rng.next_below(8));
        const int mw = 1 + static_cast<int>(rng.next_below(8));
        const int t = 1 + static_cast<int>(rng.next_below(7));

        std::vector<CompressedFrame> bank_frames;
        std::vector<float> keys_values;
        for (int f = 0; f < t; ++f) {
            bank_frames.push_back(random_pooled(rng, mh, mw, c, f, f == 0));
            keys_values.insert(keys_values.end(), bank_frames.back().tokens.begin(),
                               bank_frames.back().tokens.end());
        }
        const CompressedFrame query = random_pooled(rng, qh, qw, c, t, false);

        const SelectionResult sel = assemble_memory(bank_frames, config);
        const AttentionOutput got =
            cross_attend(query, sel.snapshot, config, sel.snapshot.total_tokens());
        const std::vector<double> want = dense_attention_reference(
            query.tokens, keys_values, query.token_count(), sel.snapshot.total_tokens(), c);

        for (std::size_t k = 0; k < got.values.size(); ++k) {
            report.attention_max_abs_err =
                std::max(report.attention_max_abs_err, std::abs(got.values[k] - want[k]));
        }
        ++report.attention_instances;
    }
}

}  // namespace

OracleReport run_oracle_suite(const OracleCounts& counts, std::uint64_t seed, bool inject_fault) {
    Xoshiro256pp rng(seed);
    OracleReport report;
    check_pooling(counts, rng, report, inject_fault);
    check_selection(counts, rng, report);
    check_bank(counts, rng, report);
    check_attention(counts, rng, report);
    return report;
}

}  // namespace oracle
}  // namespace memshrink
