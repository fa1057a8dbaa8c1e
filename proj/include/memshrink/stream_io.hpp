#pragma once

#include <string>

#include "memshrink/scenario.hpp"
#include "memshrink/types.hpp"

namespace memshrink {

// Binary stream layout, little-endian throughout:
//   header (20 bytes): magic "MBS1" (the trailing byte is the format
//     version), then u32 frame_count, h, w, c
//   per frame: h*w*c float32 row-major, float32 predicted_iou,
//     u8 object_present, u8 is_prompt, 2 zero pad bytes
inline constexpr char kStreamMagic[4] = {'M', 'B', 'S', '1'};
inline constexpr std::size_t kStreamHeaderBytes = 20;

void write_stream(const std::string& path, const std::vector<FeatureFrame>& frames);

// Throws EngineError(io_error) on filesystem failures and
// EngineError(bad_format) on malformed content.
std::vector<FeatureFrame> read_stream(const std::string& path);

ScenarioSpec load_scenario(const std::string& path);
std::string scenario_to_json(const ScenarioSpec& spec);

std::string config_to_json(const EngineConfig& config, int pooled_h, int pooled_w);

// report.json (keys: config, aggregate, frames_path) plus frames.csv rows.
void write_report(const std::string& out_dir, const EngineConfig& config, int pooled_h,
                  int pooled_w, const RunMetrics& metrics);

}  // namespace memshrink
