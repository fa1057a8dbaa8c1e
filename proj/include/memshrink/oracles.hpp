#pragma once

#include <set>

#include "memshrink/temporal.hpp"
#include "memshrink/types.hpp"

namespace memshrink {
namespace oracle {

// Independent brute-force references. These deliberately share no code with
// the production kernels: plain loops, full sorts and a list model.

// Naive triple-loop pooling.
CompressedFrame pool_frame_reference(const FeatureFrame& frame, const EngineConfig& config);

// Full sort of all (score, coord) pairs, ascending, take the first n.
std::set<TokenCoord> select_global_reference(const std::vector<ScoredToken>& scores,
                                             std::int64_t n);

// Per-frame quotas floor(n/m) (+1 for the n mod m most recent frames), each
// frame fully sorted.
std::set<TokenCoord> select_per_frame_reference(const std::vector<ScoredToken>& scores,
                                                const std::vector<std::int64_t>& motion_order,
                                                std::int64_t n);

// "Keep the last t-1 frames passing both gates" list model.
struct BankModel {
    std::optional<std::int64_t> gt_index;
    std::vector<std::int64_t> motion_indices;  // oldest first

    void step(const FeatureFrame& frame, const EngineConfig& config);
};

// Dense single-head attention over raw key/value rows, no positional code.
std::vector<double> dense_attention_reference(const std::vector<float>& queries,
                                              const std::vector<float>& keys_values,
                                              std::int64_t n_q, std::int64_t n_kv, int c);

struct OracleReport {
    int pooling_instances = 0;
    double pooling_avg_max_rel_err = 0.0;
    int pooling_max_mismatches = 0;

    int selection_instances = 0;
    int selection_mismatches = 0;

    int bank_replays = 0;
    int bank_mismatches = 0;

    int attention_instances = 0;
    double attention_max_abs_err = 0.0;

    bool pass() const {
        return pooling_avg_max_rel_err <= 1e-6 && pooling_max_mismatches == 0 &&
               selection_mismatches == 0 && bank_mismatches == 0 &&
               attention_max_abs_err <= 1e-5;
    }
};

struct OracleCounts {
    int pooling = 200;
    int selection = 500;
    int bank = 100;
    int attention = 50;
};

// Randomized cross-checks of every production kernel against the references.
// inject_fault perturbs one production pooling output (negative control).
OracleReport run_oracle_suite(const OracleCounts& counts, std::uint64_t seed,
                              bool inject_fault = false);

}  // namespace oracle
}  // namespace memshrink
