#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "helpers.hpp"
#include "poselabel/config.hpp"
#include "poselabel/errors.hpp"

using namespace poselabel;
using pipeline::PipelineConfig;

namespace {

const char* kFullConfig = R"json({
  "paths": {
    "mocap_log": "session/mocap.csv",
    "board_observations": "session/board",
    "meshes": "session/meshes",
    "masks": "session/masks",
    "extrinsics": "session/extrinsics.json",
    "truth_extrinsics": "session/truth_extrinsics.json",
    "frame_index": "session/frames.json",
    "output_root": "dataset",
    "overlay_root": "overlays"
  },
  "board": {
    "inner_cols": 10,
    "inner_rows": 7,
    "square_size_mm": 100,
    "origin_offset_mm": [100, 100, 0],
    "width_mm": 1189,
    "height_mm": 841
  },
  "cameras": {
    "cam00": {"fx": 1100, "fy": 1080, "cx": 648, "cy": 512, "width": 1296, "height": 1024,
              "k1": -0.02, "k2": 0.001},
    "cam01": {"fx": 550, "fy": 550, "cx": 324, "cy": 256, "width": 648, "height": 512}
  },
  "tuning": {
    "translation_range_mm": 30,
    "translation_step_mm": 10,
    "rotation_range_deg": 1,
    "rotation_step_deg": 0.5,
    "candidate_cap": 500000,
    "coarse_to_fine": true,
    "iou_threshold": 0.85
  },
  "annotation": {
    "min_visible_pixels": 16,
    "mock_depth_mm": 5500,
    "depth_scale": 0.5,
    "sample_window_s": 0.04
  },
  "synth": {
    "rig": {
      "ring_radius_mm": 4200,
      "camera_height_mm": 2500,
      "target_mm": [0, 0, 700],
      "position_jitter_mm": 120
    },
    "board_placements": 12,
    "corner_noise_px": 0.25,
    "tuning_samples_per_camera": 2,
    "scenarios": [
      {"name": "a", "objects": 3, "duration_s": 4, "frame_rate_hz": 5, "mocap_rate_hz": 100,
       "mocap_jitter_mm": 0.4, "mocap_jitter_deg": 0.04, "timestamp_jitter_s": 0.0004,
       "workspace_center_mm": [0, 0, 800], "workspace_half_extent_mm": [700, 700, 300],
       "max_spin_deg_s": 25},
      {"name": "b", "objects": 1, "duration_s": 2}
    ]
  },
  "workers": 3,
  "seed": 99
})json";

std::string write_config(const test_helpers::TempDir& tmp, const std::string& body,
                         const std::string& name = "config.json") {
  const std::string path = tmp.str(name);
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("a full config parses with every field populated") {
  test_helpers::TempDir tmp("cfg_full");
  const PipelineConfig cfg = PipelineConfig::load(write_config(tmp, kFullConfig));

  namespace fs = std::filesystem;
  CHECK(cfg.paths.mocap_log == (fs::path(tmp.str()) / "session/mocap.csv").lexically_normal());
  CHECK(cfg.paths.output_root == (fs::path(tmp.str()) / "dataset").lexically_normal());
  CHECK(cfg.paths.overlay_root == (fs::path(tmp.str()) / "overlays").lexically_normal());
  CHECK(fs::path(cfg.paths.extrinsics).is_absolute());

  CHECK(cfg.board.inner_cols == 10);
  CHECK(cfg.board.inner_rows == 7);
  CHECK(cfg.board.square_size == 100);
  CHECK(cfg.board.origin_offset.x() == 100);
  CHECK(cfg.board.board_width == 1189);
  CHECK(cfg.board.board_height == 841);

  REQUIRE(cfg.cameras.size() == 2);
  const auto& c0 = cfg.cameras.at("cam00");
  CHECK(c0.fx == 1100);
  CHECK(c0.fy == 1080);
  CHECK(c0.cx == 648);
  CHECK(c0.cy == 512);
  CHECK(c0.width == 1296);
  CHECK(c0.height == 1024);
  CHECK(c0.k1 == -0.02);
  CHECK(c0.k2 == 0.001);
  CHECK(cfg.cameras.at("cam01").k1 == 0.0);  // optional distortion defaults to zero

  CHECK(cfg.grid.translation_range == 30);
  CHECK(cfg.grid.translation_step == 10);
  CHECK(cfg.grid.rotation_range == 1);
  CHECK(cfg.grid.rotation_step == 0.5);
  CHECK(cfg.grid.candidate_cap == 500000);
  CHECK(cfg.grid.coarse_to_fine == true);
  CHECK(cfg.iou_threshold == 0.85);

  CHECK(cfg.annotation.min_visible_pixels == 16);
  CHECK(cfg.annotation.mock_depth_mm == 5500);
  CHECK(cfg.annotation.depth_scale == 0.5);
  CHECK(cfg.sample_window_s == 0.04);

  CHECK(cfg.rig.ring_radius_mm == 4200);
  CHECK(cfg.rig.camera_height_mm == 2500);
  CHECK(cfg.rig.target.z() == 700);
  CHECK(cfg.rig.position_jitter_mm == 120);
  CHECK(cfg.board_placements == 12);
  CHECK(cfg.corner_noise_px == 0.25);
  CHECK(cfg.tuning_samples_per_camera == 2);

  REQUIRE(cfg.scenarios.size() == 2);
  CHECK(cfg.scenarios[0].name == "a");
  CHECK(cfg.scenarios[0].object_count == 3);
  CHECK(cfg.scenarios[0].duration_s == 4);
  CHECK(cfg.scenarios[0].workspace_half_extent.x() == 700);
  CHECK(cfg.scenarios[0].max_spin_deg_s == 25);
  CHECK(cfg.scenarios[1].name == "b");
  CHECK(cfg.scenarios[1].object_count == 1);
  CHECK(cfg.scenarios[1].frame_rate_hz == 5);  // default

  CHECK(cfg.workers == 3);
  CHECK(cfg.seed == 99);
  CHECK(cfg.overwrite == false);
  CHECK(cfg.force == false);
}

TEST_CASE("a minimal config falls back to defaults") {
  test_helpers::TempDir tmp("cfg_min");
  const PipelineConfig cfg = PipelineConfig::load(write_config(tmp, "{}"));
  CHECK(cfg.paths.mocap_log.empty());
  CHECK(cfg.board.inner_cols == 10);
  CHECK(cfg.board.square_size == 100);
  CHECK(cfg.cameras.empty());
  CHECK(cfg.grid.translation_range == 50);
  CHECK(cfg.grid.rotation_range == 2);
  CHECK(cfg.iou_threshold == 0.9);
  CHECK(cfg.annotation.min_visible_pixels == 32);
  CHECK(cfg.annotation.mock_depth_mm == 6000);
  CHECK(cfg.sample_window_s == 0.02);
  CHECK(cfg.board_placements == 20);
  CHECK(cfg.corner_noise_px == 0.3);
  CHECK(cfg.scenarios.empty());
  CHECK(cfg.workers == 0);
  CHECK(cfg.seed == 1);
}

TEST_CASE("absolute paths are kept verbatim") {
  test_helpers::TempDir tmp("cfg_abs");
  const std::string path =
      write_config(tmp, R"({"paths": {"mocap_log": "/data/session/mocap.csv"}})");
  const PipelineConfig cfg = PipelineConfig::load(path);
  CHECK(cfg.paths.mocap_log == "/data/session/mocap.csv");
}

TEST_CASE("missing and malformed files are reported") {
  test_helpers::TempDir tmp("cfg_badfile");
  SUBCASE("missing file") {
    try {
      PipelineConfig::load(tmp.str("nope.json"));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::io);
    }
  }
  SUBCASE("invalid JSON") {
    try {
      PipelineConfig::load(write_config(tmp, "{ not json"));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::parse);
    }
  }
  SUBCASE("JSON with the wrong value type") {
    try {
      PipelineConfig::load(write_config(tmp, R"({"workers": "many"})"));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::schema);
    }
  }
}

TEST_CASE("unknown keys are rejected with their location") {
  test_helpers::TempDir tmp("cfg_unknown");
  const auto expect_schema = [&](const std::string& body, const std::string& needle) {
    try {
      PipelineConfig::load(write_config(tmp, body));
      FAIL("expected an error for ", body);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::schema);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_schema(R"({"worker_count": 4})", "worker_count");
  expect_schema(R"({"paths": {"mocap": "a.csv"}})", "mocap");
  expect_schema(R"({"board": {"squares": 5}})", "squares");
  expect_schema(R"({"tuning": {"step": 1}})", "step");
  expect_schema(R"({"annotation": {"minimum_pixels": 2}})", "minimum_pixels");
  expect_schema(R"({"synth": {"rig": {"radius": 1}}})", "radius");
  expect_schema(R"({"synth": {"scenarios": [{"object_count": 2}]}})", "object_count");
  expect_schema(R"({"cameras": {"cam00": {"fx": 1, "fy": 1, "cx": 0, "cy": 0,
                     "width": 10, "height": 10, "skew": 0}}})",
                "skew");
}

TEST_CASE("cameras must list their core intrinsics") {
  test_helpers::TempDir tmp("cfg_cam");
  const auto expect_schema = [&](const std::string& body, const std::string& needle) {
    try {
      PipelineConfig::load(write_config(tmp, body));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::schema);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_schema(R"({"cameras": {"cam00": {"fy": 1, "cx": 0, "cy": 0, "width": 8, "height": 8}}})",
                "fx");
  expect_schema(R"({"cameras": {"cam00": {"fx": 1, "fy": 1, "cx": 0, "cy": 0, "width": 8}}})",
                "height");
  expect_schema(R"({"cameras": {"": {"fx": 1, "fy": 1, "cx": 0, "cy": 0,
                     "width": 8, "height": 8}}})",
                "non-empty");
  expect_schema(R"({"cameras": [1, 2]})", "object");
}

TEST_CASE("out-of-range values are rejected") {
  test_helpers::TempDir tmp("cfg_range");
  const auto expect_error = [&](const std::string& body) {
    CHECK_THROWS_AS(PipelineConfig::load(write_config(tmp, body)), Error);
  };
  expect_error(R"({"board": {"square_size_mm": 0}})");
  expect_error(R"({"board": {"inner_cols": 1}})");
  expect_error(R"({"board": {"origin_offset_mm": [1, 2]}})");
  expect_error(R"({"cameras": {"cam00": {"fx": 0, "fy": 1, "cx": 0, "cy": 0,
                    "width": 8, "height": 8}}})");
  expect_error(R"({"tuning": {"translation_step_mm": 0}})");
  expect_error(R"({"tuning": {"iou_threshold": 0}})");
  expect_error(R"({"tuning": {"iou_threshold": 1.5}})");
  expect_error(R"({"annotation": {"min_visible_pixels": -1}})");
  expect_error(R"({"annotation": {"mock_depth_mm": 0}})");
  expect_error(R"({"annotation": {"depth_scale": 0}})");
  expect_error(R"({"annotation": {"sample_window_s": 0}})");
  expect_error(R"({"synth": {"board_placements": 0}})");
  expect_error(R"({"synth": {"corner_noise_px": -0.1}})");
  expect_error(R"({"synth": {"tuning_samples_per_camera": 0}})");
  expect_error(R"({"synth": {"scenarios": [{"duration_s": -2}]}})");
  expect_error(R"({"workers": -1})");
}

TEST_CASE("scenario names default to their position") {
  test_helpers::TempDir tmp("cfg_name");
  const PipelineConfig cfg = PipelineConfig::load(
      write_config(tmp, R"({"synth": {"scenarios": [{"objects": 1}, {"objects": 2}]}})"));
  REQUIRE(cfg.scenarios.size() == 2);
  CHECK(cfg.scenarios[0].name == "scenario_1");
  CHECK(cfg.scenarios[1].name == "scenario_2");
}

TEST_SUITE_END();
