#include "memshrink/stream_io.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace memshrink {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32(out, bits);
}

std::uint32_t get_u32(const std::string& buf, std::size_t& pos) {
    if (pos + 4 > buf.size()) {
        throw EngineError(ErrorCode::bad_format, "truncated stream file");
    }
    const auto b = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    pos += 4;
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

float get_f32(const std::string& buf, std::size_t& pos) {
    const std::uint32_t bits = get_u32(buf, pos);
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

std::uint8_t get_u8(const std::string& buf, std::size_t& pos) {
    if (pos + 1 > buf.size()) {
        throw EngineError(ErrorCode::bad_format, "truncated stream file");
    }
    return static_cast<std::uint8_t>(buf[pos++]);
}

}  // namespace

void write_stream(const std::string& path, const std::vector<FeatureFrame>& frames) {
    std::string buf;
    buf.append(kStreamMagic, 4);
    put_u32(buf, static_cast<std::uint32_t>(frames.size()));
    const int h = frames.empty() ? 0 : frames[0].h;
    const int w = frames.empty() ? 0 : frames[0].w;
    const int c = frames.empty() ? 0 : frames[0].c;
    put_u32(buf, static_cast<std::uint32_t>(h));
    put_u32(buf, static_cast<std::uint32_t>(w));
    put_u32(buf, static_cast<std::uint32_t>(c));

    for (const auto& frame : frames) {
        if (frame.h != h || frame.w != w || frame.c != c) {
            throw EngineError(ErrorCode::dims_mismatch, "stream frames must share dims");
        }
        for (const float v : frame.data) {
            put_f32(buf, v);
        }
        put_f32(buf, frame.predicted_iou);
        buf.push_back(frame.object_present ? 1 : 0);
        buf.push_back(frame.is_prompt ? 1 : 0);
        buf.push_back(0);
        buf.push_back(0);
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw EngineError(ErrorCode::io_error, "cannot open " + path + " for writing");
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw EngineError(ErrorCode::io_error, "short write to " + path);
    }
}

std::vector<FeatureFrame> read_stream(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw EngineError(ErrorCode::io_error, "cannot open " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string buf = ss.str();

    if (buf.size() < kStreamHeaderBytes || std::memcmp(buf.data(), kStreamMagic, 4) != 0) {
        throw EngineError(ErrorCode::bad_format, "bad magic or truncated header in " + path);
    }
    std::size_t pos = 4;
    const std::uint32_t frame_count = get_u32(buf, pos);
    const std::uint32_t h = get_u32(buf, pos);
    const std::uint32_t w = get_u32(buf, pos);
    const std::uint32_t c = get_u32(buf, pos);

    std::vector<FeatureFrame> frames;
    frames.reserve(frame_count);
    for (std::uint32_t f = 0; f < frame_count; ++f) {
        FeatureFrame frame;
        frame.frame_index = f;
        frame.h = static_cast<int>(h);
        frame.w = static_cast<int>(w);
        frame.c = static_cast<int>(c);
        frame.data.resize(static_cast<std::size_t>(h) * w * c);
        for (auto& v : frame.data) {
            v = get_f32(buf, pos);
        }
        frame.predicted_iou = get_f32(buf, pos);
        frame.object_present = get_u8(buf, pos) != 0;
        frame.is_prompt = get_u8(buf, pos) != 0;
        get_u8(buf, pos);
        get_u8(buf, pos);
        frames.push_back(std::move(frame));
    }
    if (pos != buf.size()) {
        throw EngineError(ErrorCode::bad_format, "trailing bytes in " + path);
    }
    return frames;
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw EngineError(ErrorCode::io_error, "cannot open scenario " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw EngineError(ErrorCode::bad_format, "scenario parse error: " + std::string(e.what()));
    }

    ScenarioSpec spec;
    try {
        spec.h = j.value("h", spec.h);
        spec.w = j.value("w", spec.w);
        spec.c = j.value("c", spec.c);
        spec.frame_count = j.value("frame_count", spec.frame_count);
        spec.seed = j.value("seed", spec.seed);
        spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
        if (j.contains("blob")) {
            const auto& b = j["blob"];
            spec.blob.radius = b.value("radius", spec.blob.radius);
            spec.blob.amplitude = b.value("amplitude", spec.blob.amplitude);
            if (b.contains("velocity")) {
                spec.blob.vel_r = b["velocity"].at(0).get<int>();
                spec.blob.vel_c = b["velocity"].at(1).get<int>();
            }
        }
        if (j.contains("occlusion_windows")) {
            for (const auto& win : j["occlusion_windows"]) {
                spec.occlusion_windows.emplace_back(win.at(0).get<int>(), win.at(1).get<int>());
            }
        }
        if (j.contains("iou")) {
            if (j["iou"].is_array()) {
                spec.iou_schedule = j["iou"].get<std::vector<float>>();
            } else {
                spec.iou_constant = j["iou"].get<float>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw EngineError(ErrorCode::bad_format, "scenario field error: " + std::string(e.what()));
    }
    return spec;
}

std::string scenario_to_json(const ScenarioSpec& spec) {
    nlohmann::json j;
    j["h"] = spec.h;
    j["w"] = spec.w;
    j["c"] = spec.c;
    j["frame_count"] = spec.frame_count;
    j["seed"] = spec.seed;
    j["noise_sigma"] = spec.noise_sigma;
    j["blob"] = {{"radius", spec.blob.radius},
                 {"velocity", {spec.blob.vel_r, spec.blob.vel_c}},
                 {"amplitude", spec.blob.amplitude}};
    j["occlusion_windows"] = nlohmann::json::array();
    for (const auto& [start, end] : spec.occlusion_windows) {
        j["occlusion_windows"].push_back({start, end});
    }
    if (spec.iou_schedule.empty()) {
        j["iou"] = spec.iou_constant;
    } else {
        j["iou"] = spec.iou_schedule;
    }
    return j.dump(2);
}

namespace {

nlohmann::json config_json(const EngineConfig& config, int pooled_h, int pooled_w) {
    nlohmann::json j;
    j["pool_dh"] = config.pool_dh;
    j["pool_dw"] = config.pool_dw;
    j["pooling"] = to_string(config.pooling);
    j["bank_capacity"] = config.bank_capacity;
    j["selection_budget"] = config.resolved_budget(pooled_h, pooled_w);
    j["anchor"] = to_string(config.anchor);
    j["scope"] = to_string(config.scope);
    j["strategy"] = to_string(config.strategy);
    j["iou_threshold"] = config.iou_threshold;
    j["absence_filter"] = config.absence_filter;
    j["iou_gate"] = config.iou_gate;
    j["position_encoding"] = config.position_encoding;
    return j;
}

}  // namespace

std::string config_to_json(const EngineConfig& config, int pooled_h, int pooled_w) {
    return config_json(config, pooled_h, pooled_w).dump(2);
}

void write_report(const std::string& out_dir, const EngineConfig& config, int pooled_h,
                  int pooled_w, const RunMetrics& metrics) {
    {
        std::ofstream csv(out_dir + "/frames.csv", std::ios::trunc);
        if (!csv) {
            throw EngineError(ErrorCode::io_error, "cannot write frames.csv in " + out_dir);
        }
        csv << "frame_index,admitted,reason,memory_tokens,compression_ratio,motion_recall,"
               "mac_count\n";
        csv << std::setprecision(17);
        for (const auto& fm : metrics.frames) {
            csv << fm.frame_index << ',' << (fm.admitted ? 1 : 0) << ',' << to_string(fm.reason)
                << ',' << fm.memory_tokens << ',' << fm.compression_ratio << ','
                << fm.motion_recall << ',' << fm.mac_count << '\n';
        }
    }

    nlohmann::json report;
    report["config"] = config_json(config, pooled_h, pooled_w);
    report["aggregate"] = {
        {"frames", metrics.frames.size()},
        {"mean_compression_ratio", metrics.mean_ratio},
        {"mean_motion_recall", metrics.mean_recall},
        {"total_macs", metrics.total_macs},
        {"final_memory_tokens",
         metrics.frames.empty() ? 0 : metrics.frames.back().memory_tokens},
    };
    report["frames_path"] = "frames.csv";

    std::ofstream out(out_dir + "/report.json", std::ios::trunc);
    if (!out) {
        throw EngineError(ErrorCode::io_error, "cannot write report.json in " + out_dir);
    }
    out << report.dump(2) << '\n';
}

}  // namespace memshrink
