#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "helpers.hpp"
#include "memshrink/scenario.hpp"
#include "memshrink/stream_io.hpp"

using namespace memshrink;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("memshrink_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

}  // namespace

TEST_CASE("a 2x2x1 single-frame stream file is exactly 44 bytes") {
    TempDir dir;
    const auto path = (dir.path / "tiny.mbs").string();
    auto frame = test::make_frame(2, 2, 1, {1.0f, 2.0f, 3.0f, 4.0f}, 0, true);
    write_stream(path, {frame});
    CHECK(fs::file_size(path) == 44);
}

TEST_CASE("validated frames round-trip bit-exactly") {
    TempDir dir;
    const auto path = (dir.path / "roundtrip.mbs").string();
    EngineConfig config;
    Xoshiro256pp rng(19);
    std::vector<FeatureFrame> frames;
    for (int f = 0; f < 9; ++f) {
        auto frame = test::random_frame(rng, 6, 4, 3, f);
        frame.is_prompt = (f == 0);
        frame.object_present = rng.next_below(2) == 0;
        frame.predicted_iou = static_cast<float>(rng.next_double());
        REQUIRE(validate_frame(frame, config).ok());
        frames.push_back(std::move(frame));
    }
    write_stream(path, frames);
    const auto got = read_stream(path);
    REQUIRE(got.size() == frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        CHECK(got[f].data == frames[f].data);
        CHECK(got[f].predicted_iou == frames[f].predicted_iou);
        CHECK(got[f].object_present == frames[f].object_present);
        CHECK(got[f].is_prompt == frames[f].is_prompt);
        CHECK(got[f].frame_index == frames[f].frame_index);
    }
}

TEST_CASE("corrupted magic is rejected") {
    TempDir dir;
    const auto path = (dir.path / "bad.mbs").string();
    write_stream(path, {test::make_frame(2, 2, 1, {0, 0, 0, 0}, 0, true)});
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.put('X');
    }
    CHECK_THROWS_AS(read_stream(path), EngineError);
}

TEST_CASE("truncated payloads are rejected") {
    TempDir dir;
    const auto path = (dir.path / "short.mbs").string();
    write_stream(path, {test::make_frame(2, 2, 1, {0, 0, 0, 0}, 0, true)});
    fs::resize_file(path, 30);
    CHECK_THROWS_AS(read_stream(path), EngineError);
}

TEST_CASE("scenario json round-trips through save and load") {
    TempDir dir;
    ScenarioSpec spec;
    spec.h = 32;
    spec.w = 16;
    spec.c = 8;
    spec.frame_count = 5;
    spec.seed = 1234;
    spec.blob = {2, -1, 3, 0.5f};
    spec.noise_sigma = 0.25f;
    spec.occlusion_windows = {{1, 2}};
    spec.iou_schedule = {0.9f, 0.8f};
    const auto path = (dir.path / "scenario.json").string();
    {
        std::ofstream out(path);
        out << scenario_to_json(spec);
    }
    const auto got = load_scenario(path);
    CHECK(got.h == spec.h);
    CHECK(got.w == spec.w);
    CHECK(got.c == spec.c);
    CHECK(got.frame_count == spec.frame_count);
    CHECK(got.seed == spec.seed);
    CHECK(got.blob.radius == spec.blob.radius);
    CHECK(got.blob.vel_r == spec.blob.vel_r);
    CHECK(got.blob.vel_c == spec.blob.vel_c);
    CHECK(got.blob.amplitude == spec.blob.amplitude);
    CHECK(got.noise_sigma == spec.noise_sigma);
    CHECK(got.occlusion_windows == spec.occlusion_windows);
    CHECK(got.iou_schedule == spec.iou_schedule);
}

TEST_CASE("report files carry the stable schema and finite numbers") {
    TempDir dir;
    EngineConfig config;
    ScenarioSpec spec;
    spec.h = spec.w = 16;
    spec.c = 8;
    spec.frame_count = 10;
    spec.blob.radius = 1;
    const auto stream = generate_stream(spec, config);
    const auto metrics = run_pipeline(stream.frames, &stream.moved_masks, config);
    write_report(dir.path.string(), config, 8, 8, metrics);

    std::ifstream in(dir.path / "report.json");
    REQUIRE(in.good());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("\"config\"") != std::string::npos);
    CHECK(text.find("\"aggregate\"") != std::string::npos);
    CHECK(text.find("\"frames_path\"") != std::string::npos);
    CHECK(text.find("nan") == std::string::npos);
    CHECK(text.find("inf") == std::string::npos);

    std::ifstream csv(dir.path / "frames.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header ==
          "frame_index,admitted,reason,memory_tokens,compression_ratio,motion_recall,mac_count");
    int rows = 0;
    for (std::string line; std::getline(csv, line);) {
        ++rows;
        CHECK(line.find("nan") == std::string::npos);
        CHECK(line.find("inf") == std::string::npos);
    }
    CHECK(rows == spec.frame_count);
}
