#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "memshrink/attention.hpp"
#include "memshrink/oracles.hpp"
#include "memshrink/temporal.hpp"

using namespace memshrink;

TEST_CASE("origin coordinate encodes to the sin=0 cos=1 pattern") {
    for (const int c : {6, 12, 16, 32}) {
        const auto pe = position_encode({0, 0, 0}, c);
        for (std::size_t i = 0; i < pe.size(); i += 2) {
            CHECK(pe[i] == 0.0f);
            CHECK(pe[i + 1] == 1.0f);
        }
    }
}

TEST_CASE("position encoding is deterministic") {
    const auto a = position_encode({3, 7, 11}, 16);
    const auto b = position_encode({3, 7, 11}, 16);
    CHECK(a == b);
}

TEST_CASE("row and col changes touch only their channel groups") {
    // c=12: three groups of 4 channels for frame, row, col.
    const auto base = position_encode({0, 0, 0}, 12);
    const auto row = position_encode({0, 1, 0}, 12);
    const auto col = position_encode({0, 0, 1}, 12);
    for (int k = 0; k < 12; ++k) {
        const bool in_row_group = k >= 4 && k < 8;
        const bool in_col_group = k >= 8;
        CHECK((row[k] != base[k]) == in_row_group);
        CHECK((col[k] != base[k]) == in_col_group);
    }
    // the two vectors differ from each other in both groups
    CHECK(row != col);
}

TEST_CASE("odd or tiny channel counts are rejected") {
    CHECK_THROWS_AS(position_encode({0, 0, 0}, 4), EngineError);
    CHECK_THROWS_AS(position_encode({0, 0, 0}, 7), EngineError);
}

namespace {

MemorySnapshot single_token_memory(const std::vector<float>& v) {
    MemorySnapshot memory;
    memory.channels = static_cast<int>(v.size());
    memory.gt_tokens.push_back({TokenCoord{0, 0, 0}, v});
    return memory;
}

CompressedFrame query_grid(Xoshiro256pp& rng, int ph, int pw, int c) {
    return test::random_pooled(rng, ph, pw, c, 5, false);
}

}  // namespace

TEST_CASE("single-key attention returns the raw memory value") {
    Xoshiro256pp rng(61);
    EngineConfig config;
    config.position_encoding = false;
    const std::vector<float> v = {1.5f, -2.0f, 0.25f, 3.0f};
    const auto memory = single_token_memory(v);
    const auto query = query_grid(rng, 2, 3, 4);
    const auto out = cross_attend(query, memory, config, 1);
    for (std::int64_t q = 0; q < out.n_q; ++q) {
        for (int k = 0; k < 4; ++k) {
            CHECK(out.values[q * 4 + k] == doctest::Approx(v[k]).epsilon(1e-12));
        }
    }
}

TEST_CASE("identical values collapse to that value") {
    Xoshiro256pp rng(67);
    EngineConfig config;
    config.position_encoding = false;
    MemorySnapshot memory;
    memory.channels = 4;
    const std::vector<float> v = {0.5f, 1.0f, -1.0f, 2.0f};
    for (int i = 0; i < 9; ++i) {
        Xoshiro256pp krng(100 + i);
        std::vector<float> key = v;
        memory.selected_tokens.push_back({TokenCoord{1, 0, i}, key});
    }
    const auto query = query_grid(rng, 1, 4, 4);
    const auto out = cross_attend(query, memory, config, 9);
    for (std::int64_t q = 0; q < out.n_q; ++q) {
        for (int k = 0; k < 4; ++k) {
            CHECK(out.values[q * 4 + k] == doctest::Approx(v[k]).epsilon(1e-6));
        }
    }
}

TEST_CASE("attention weights stay normalized at large logit scales") {
    Xoshiro256pp rng(71);
    EngineConfig config;
    config.position_encoding = false;
    MemorySnapshot memory;
    memory.channels = 8;
    for (int i = 0; i < 12; ++i) {
        std::vector<float> key(8);
        for (auto& x : key) {
            x = static_cast<float>(rng.next_uniform(-1e4, 1e4));
        }
        memory.selected_tokens.push_back({TokenCoord{1, 0, i}, key});
    }
    auto query = query_grid(rng, 2, 2, 8);
    for (auto& x : query.tokens) {
        x *= 1e4f;
    }
    const auto out = cross_attend(query, memory, config, 12);
    CHECK(std::isfinite(out.weights_checksum));
    CHECK(out.weights_checksum ==
          doctest::Approx(static_cast<double>(out.n_q)).epsilon(1e-6));
}

TEST_CASE("memory permutation leaves the output unchanged without PE") {
    Xoshiro256pp rng(73);
    EngineConfig config;
    config.position_encoding = false;
    MemorySnapshot memory;
    memory.channels = 6;
    for (int i = 0; i < 10; ++i) {
        std::vector<float> key(6);
        for (auto& x : key) x = static_cast<float>(rng.next_uniform(-2.0, 2.0));
        memory.selected_tokens.push_back({TokenCoord{1, 0, i}, key});
    }
    MemorySnapshot permuted = memory;
    std::reverse(permuted.selected_tokens.begin(), permuted.selected_tokens.end());

    const auto query = query_grid(rng, 2, 2, 6);
    const auto a = cross_attend(query, memory, config, 10);
    const auto b = cross_attend(query, permuted, config, 10);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-6));
    }
}

TEST_CASE("empty memory and channel mismatches are errors") {
    Xoshiro256pp rng(79);
    EngineConfig config;
    config.position_encoding = false;
    const auto query = query_grid(rng, 2, 2, 4);
    MemorySnapshot empty;
    empty.channels = 4;
    CHECK_THROWS_AS(cross_attend(query, empty, config, 1), EngineError);
    const auto memory = single_token_memory({1.0f, 2.0f});
    CHECK_THROWS_AS(cross_attend(query, memory, config, 1), EngineError);
}

TEST_CASE("cost_of reproduces the published token ratios") {
    EngineConfig config;
    const auto def = cost_of(config, 64, 64, 16, 7, TemporalStrategy::topn_select);
    CHECK(def.memory_tokens == 2048);
    CHECK(def.compression_ratio == doctest::Approx(1.0 / 14.0).epsilon(1e-12));

    const auto gfl = cost_of(config, 64, 64, 16, 7, TemporalStrategy::retain_gt_first_last);
    CHECK(gfl.memory_tokens == 3072);
    CHECK(gfl.compression_ratio == doctest::Approx(3.0 / 28.0).epsilon(1e-12));

    const auto avg = cost_of(config, 64, 64, 16, 7, TemporalStrategy::moving_average);
    CHECK(avg.memory_tokens == 1024);
    CHECK(avg.compression_ratio == doctest::Approx(1.0 / 28.0).epsilon(1e-12));

    const auto none = cost_of(config, 64, 64, 16, 7, TemporalStrategy::no_tmc);
    CHECK(none.memory_tokens * 2 == def.memory_tokens * 7);
}

TEST_CASE("mac_count matches an instrumented attention run") {
    Xoshiro256pp rng(83);
    EngineConfig config;
    config.position_encoding = false;
    MemorySnapshot memory;
    memory.channels = 4;
    for (int i = 0; i < 5; ++i) {
        std::vector<float> key(4, static_cast<float>(i));
        key[0] = 1.0f;
        memory.selected_tokens.push_back({TokenCoord{1, 0, i}, key});
    }
    const auto query = query_grid(rng, 3, 2, 4);
    const auto out = cross_attend(query, memory, config, 5);
    CHECK(out.cost.mac_count == 2 * 6 * 5 * 4);
    CHECK(out.cost.query_tokens == 6);
    CHECK(out.cost.memory_tokens == 5);
}

TEST_CASE("identity-compression attention matches the dense oracle") {
    oracle::OracleCounts counts;
    counts.pooling = counts.selection = counts.bank = 0;
    counts.attention = 20;
    const auto report = oracle::run_oracle_suite(counts, 88);
    CHECK(report.attention_instances == 20);
    CHECK(report.attention_max_abs_err <= 1e-5);
}
