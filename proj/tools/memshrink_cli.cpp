// memshrink: streaming memory-token compression driver.
//
// Subcommands:
//   gen    - synthesize a feature stream from a scenario JSON and write the
//            binary stream plus a .meta.json sidecar
//   run    - run the full pipeline on a scenario or a binary stream, writing
//            report.json and frames.csv
//   oracle - cross-check the production kernels against brute-force oracles

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "memshrink/attention.hpp"
#include "memshrink/oracles.hpp"
#include "memshrink/pooling.hpp"
#include "memshrink/scenario.hpp"
#include "memshrink/stream_io.hpp"

namespace {

using namespace memshrink;

int log_level() {
    const char* env = std::getenv("MEMSHRINK_LOG");
    if (env == nullptr) return 0;
    const std::string v = env;
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
}

struct ConfigFlags {
    std::string strategy = "topn";
    std::string anchor = "prev";
    std::string scope = "global";
    std::string pool = "avg";
    std::string pool_size = "2x2";
    std::string budget = "auto";
    int capacity = 7;
    float iou_threshold = 0.5f;
    bool no_absence_filter = false;
    bool no_iou_gate = false;
    bool no_pe = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--strategy", strategy)
            ->check(CLI::IsMember({"topn", "no-tmc", "gt-last", "first-last", "moving-avg",
                                   "gt-first-last"}));
        cmd->add_option("--anchor", anchor)->check(CLI::IsMember({"prev", "gt"}));
        cmd->add_option("--scope", scope)->check(CLI::IsMember({"global", "per-frame"}));
        cmd->add_option("--pool", pool)->check(CLI::IsMember({"avg", "max"}));
        cmd->add_option("--pool-size", pool_size, "window as HxW, e.g. 2x2");
        cmd->add_option("--budget", budget, "token budget, integer or 'auto'");
        cmd->add_option("--capacity", capacity, "bank capacity incl. GT frame");
        cmd->add_option("--iou-threshold", iou_threshold);
        cmd->add_flag("--no-absence-filter", no_absence_filter);
        cmd->add_flag("--no-iou-gate", no_iou_gate);
        cmd->add_flag("--no-pe", no_pe);
    }

    EngineConfig resolve() const {
        EngineConfig config;
        if (strategy == "topn") config.strategy = TemporalStrategy::topn_select;
        else if (strategy == "no-tmc") config.strategy = TemporalStrategy::no_tmc;
        else if (strategy == "gt-last") config.strategy = TemporalStrategy::gt_plus_last;
        else if (strategy == "first-last") config.strategy = TemporalStrategy::first_plus_last;
        else if (strategy == "moving-avg") config.strategy = TemporalStrategy::moving_average;
        else config.strategy = TemporalStrategy::retain_gt_first_last;
        config.anchor = anchor == "gt" ? Anchor::gt : Anchor::previous;
        config.scope = scope == "per-frame" ? Scope::per_frame : Scope::global;
        config.pooling = pool == "max" ? PoolingKind::max : PoolingKind::average;

        const auto x = pool_size.find('x');
        if (x == std::string::npos) {
            throw EngineError(ErrorCode::bad_config, "--pool-size must look like 2x2");
        }
        try {
            config.pool_dh = std::stoi(pool_size.substr(0, x));
            config.pool_dw = std::stoi(pool_size.substr(x + 1));
        } catch (const std::exception&) {
            throw EngineError(ErrorCode::bad_config, "--pool-size must look like 2x2");
        }

        if (budget != "auto") {
            try {
                config.selection_budget = std::stoll(budget);
            } catch (const std::exception&) {
                throw EngineError(ErrorCode::bad_config, "--budget must be an integer or 'auto'");
            }
        }
        config.bank_capacity = capacity;
        config.iou_threshold = iou_threshold;
        config.absence_filter = !no_absence_filter;
        config.iou_gate = !no_iou_gate;
        config.position_encoding = !no_pe;
        config.validate();
        return config;
    }
};

int exit_code_for(const EngineError& err) {
    switch (err.code) {
        case ErrorCode::io_error:
        case ErrorCode::bad_format:
        case ErrorCode::dimension_mismatch:
        case ErrorCode::missing_gt_frame:
            return 2;
        case ErrorCode::bad_config:
        case ErrorCode::pooling_divisibility:
        case ErrorCode::iou_out_of_range:
            return 3;
        default:
            return 1;
    }
}

int cmd_gen(const std::string& scenario_path, const std::string& out_path,
            const ConfigFlags& flags, std::optional<std::uint64_t> seed_override) {
    const EngineConfig config = flags.resolve();
    ScenarioSpec spec = load_scenario(scenario_path);
    if (seed_override) {
        spec.seed = *seed_override;
    }
    const GeneratedStream stream = generate_stream(spec, config);
    write_stream(out_path, stream.frames);
    std::ofstream meta(out_path + ".meta.json", std::ios::trunc);
    if (!meta) {
        throw EngineError(ErrorCode::io_error, "cannot write sidecar for " + out_path);
    }
    meta << scenario_to_json(spec) << '\n';
    if (log_level() >= 1) {
        std::cerr << "[info] wrote " << stream.frames.size() << " frames to " << out_path
                  << '\n';
    }
    return 0;
}

int cmd_run(const std::string& scenario_path, const std::string& stream_path,
            const std::string& out_dir, const ConfigFlags& flags, bool print_config,
            std::optional<std::uint64_t> seed_override) {
    const EngineConfig config = flags.resolve();

    std::vector<FeatureFrame> frames;
    std::vector<std::vector<std::uint8_t>> moved_masks;
    const std::vector<std::vector<std::uint8_t>>* masks = nullptr;
    if (!scenario_path.empty()) {
        ScenarioSpec spec = load_scenario(scenario_path);
        if (seed_override) {
            spec.seed = *seed_override;
        }
        GeneratedStream generated = generate_stream(spec, config);
        frames = std::move(generated.frames);
        moved_masks = std::move(generated.moved_masks);
        masks = &moved_masks;
    } else {
        frames = read_stream(stream_path);
    }
    if (frames.empty()) {
        throw EngineError(ErrorCode::bad_format, "input stream holds no frames");
    }

    const auto validation = validate_frame(frames.front(), config);
    if (!validation.ok()) {
        throw EngineError(*validation.error, validation.message);
    }
    const int pooled_h = frames.front().h / config.pool_dh;
    const int pooled_w = frames.front().w / config.pool_dw;
    if (print_config) {
        std::cout << config_to_json(config, pooled_h, pooled_w) << '\n';
    }

    const RunMetrics metrics = run_pipeline(frames, masks, config);
    std::filesystem::create_directories(out_dir);
    write_report(out_dir, config, pooled_h, pooled_w, metrics);

    if (log_level() >= 2) {
        for (const auto& fm : metrics.frames) {
            std::cerr << "[debug] frame " << fm.frame_index << " " << to_string(fm.reason)
                      << " tokens=" << fm.memory_tokens << " ratio=" << fm.compression_ratio
                      << '\n';
        }
    }
    if (log_level() >= 1) {
        std::cerr << "[info] " << metrics.frames.size() << " frames, mean ratio "
                  << metrics.mean_ratio << ", mean recall " << metrics.mean_recall << '\n';
    }
    return 0;
}

int cmd_oracle(std::optional<int> instances, std::uint64_t seed, bool inject_fault) {
    oracle::OracleCounts counts;
    if (instances) {
        counts.pooling = counts.selection = counts.bank = counts.attention = *instances;
    }
    const oracle::OracleReport report = oracle::run_oracle_suite(counts, seed, inject_fault);
    std::cout << "pooling:   " << report.pooling_instances << " instances, max rel err "
              << report.pooling_avg_max_rel_err << ", max mismatches "
              << report.pooling_max_mismatches << '\n';
    std::cout << "selection: " << report.selection_instances << " instances, "
              << report.selection_mismatches << " index-set mismatches\n";
    std::cout << "bank:      " << report.bank_replays << " replays, " << report.bank_mismatches
              << " state mismatches\n";
    std::cout << "attention: " << report.attention_instances << " instances, max abs err "
              << report.attention_max_abs_err << '\n';
    std::cout << (report.pass() ? "ORACLES PASS" : "ORACLES FAIL") << '\n';
    return report.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming memory-token compression engine"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a binary feature stream");
    std::string gen_scenario;
    std::string gen_out;
    ConfigFlags gen_flags;
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--scenario", gen_scenario, "scenario JSON")->required();
    gen->add_option("--out", gen_out, "output stream path")->required();
    gen->add_option("--seed", gen_seed, "override the scenario seed");
    gen_flags.attach(gen);

    // run
    auto* run = app.add_subcommand("run", "run the compression pipeline");
    std::string run_scenario;
    std::string run_stream;
    std::string run_out = ".";
    bool print_config = false;
    ConfigFlags run_flags;
    std::optional<std::uint64_t> run_seed;
    auto* scenario_opt = run->add_option("--scenario", run_scenario, "scenario JSON");
    auto* stream_opt = run->add_option("--stream", run_stream, "binary stream file");
    scenario_opt->excludes(stream_opt);
    run->add_option("--out", run_out, "output directory");
    run->add_option("--seed", run_seed, "override the scenario seed");
    run->add_flag("--print-config", print_config, "echo the resolved config");
    run_flags.attach(run);

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "run the brute-force oracle suite");
    std::optional<int> instances;
    std::uint64_t oracle_seed = 1234;
    bool inject_fault = false;
    oracle_cmd->add_option("--instances", instances, "instance count for every check");
    oracle_cmd->add_option("--seed", oracle_seed);
    oracle_cmd->add_flag("--inject-fault", inject_fault)->group("");  // test-only

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_gen(gen_scenario, gen_out, gen_flags, gen_seed);
        }
        if (run->parsed()) {
            if (run_scenario.empty() == run_stream.empty()) {
                std::cerr << "error: exactly one of --scenario / --stream is required\n";
                return 3;
            }
            return cmd_run(run_scenario, run_stream, run_out, run_flags, print_config, run_seed);
        }
        return cmd_oracle(instances, oracle_seed, inject_fault);
    } catch (const memshrink::EngineError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return exit_code_for(err);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
}
