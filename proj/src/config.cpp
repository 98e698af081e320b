#include "poselabel/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>

#include <nlohmann/json.hpp>

#include "poselabel/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace poselabel::pipeline {

namespace {

[[noreturn]] void fail(const std::string& file, const std::string& msg) {
  throw Error(Errc::schema, file + ": " + msg);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& file, const std::string& section) {
  for (const auto& [key, value] : obj.items()) {
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char* a) { return key == a; });
    if (!known) fail(file, "unknown key '" + key + "' in " + section);
  }
}

Vec3 parse_vec3(const json& a, const std::string& file, const std::string& what) {
  if (!a.is_array() || a.size() != 3) fail(file, what + " must be an array of 3 numbers");
  return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
}

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return "";
  fs::path q(p);
  return (q.is_absolute() ? q : base / q).lexically_normal().string();
}

board::BoardSpec parse_board(const json& b, const std::string& file) {
  check_keys(b, {"inner_cols", "inner_rows", "square_size_mm", "origin_offset_mm", "width_mm",
                 "height_mm"},
             file, "board");
  board::BoardSpec spec;
  spec.inner_cols = b.value("inner_cols", spec.inner_cols);
  spec.inner_rows = b.value("inner_rows", spec.inner_rows);
  spec.square_size = b.value("square_size_mm", spec.square_size);
  if (b.contains("origin_offset_mm"))
    spec.origin_offset = parse_vec3(b["origin_offset_mm"], file, "board.origin_offset_mm");
  spec.board_width = b.value("width_mm", spec.board_width);
  spec.board_height = b.value("height_mm", spec.board_height);
  spec.validate();
  return spec;
}

CameraIntrinsics parse_camera(const json& c, const std::string& file, const std::string& id) {
  check_keys(c, {"fx", "fy", "cx", "cy", "width", "height", "k1", "k2"}, file, "cameras." + id);
  for (const char* required : {"fx", "fy", "cx", "cy", "width", "height"})
    if (!c.contains(required)) fail(file, "cameras." + id + " is missing '" + required + "'");
  return CameraIntrinsics::make(c["fx"].get<double>(), c["fy"].get<double>(),
                                c["cx"].get<double>(), c["cy"].get<double>(),
                                c["width"].get<int>(), c["height"].get<int>(),
                                c.value("k1", 0.0), c.value("k2", 0.0));
}

synth::ScenarioSpec parse_scenario(const json& s, const std::string& file, size_t index) {
  std::string section = "synth.scenarios[" + std::to_string(index) + "]";
  check_keys(s,
             {"name", "objects", "duration_s", "frame_rate_hz", "mocap_rate_hz",
              "mocap_jitter_mm", "mocap_jitter_deg", "timestamp_jitter_s", "workspace_center_mm",
              "workspace_half_extent_mm", "max_spin_deg_s"},
             file, section);
  synth::ScenarioSpec spec;
  spec.name = s.value("name", "scenario_" + std::to_string(index + 1));
  spec.object_count = s.value("objects", spec.object_count);
  spec.duration_s = s.value("duration_s", spec.duration_s);
  spec.frame_rate_hz = s.value("frame_rate_hz", spec.frame_rate_hz);
  spec.mocap_rate_hz = s.value("mocap_rate_hz", spec.mocap_rate_hz);
  spec.mocap_jitter_mm = s.value("mocap_jitter_mm", spec.mocap_jitter_mm);
  spec.mocap_jitter_deg = s.value("mocap_jitter_deg", spec.mocap_jitter_deg);
  spec.timestamp_jitter_s = s.value("timestamp_jitter_s", spec.timestamp_jitter_s);
  if (s.contains("workspace_center_mm"))
    spec.workspace_center = parse_vec3(s["workspace_center_mm"], file, section + ".workspace_center_mm");
  if (s.contains("workspace_half_extent_mm"))
    spec.workspace_half_extent =
        parse_vec3(s["workspace_half_extent_mm"], file, section + ".workspace_half_extent_mm");
  spec.max_spin_deg_s = s.value("max_spin_deg_s", spec.max_spin_deg_s);
  spec.validate();
  return spec;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, path + ": " + e.what());
  }

  PipelineConfig cfg;
  try {
    check_keys(doc, {"paths", "board", "cameras", "tuning", "annotation", "synth", "workers",
                     "seed"},
               path, "the config root");

    fs::path base = fs::absolute(fs::path(path)).parent_path();
    if (doc.contains("paths")) {
      const json& p = doc["paths"];
      check_keys(p,
                 {"mocap_log", "board_observations", "meshes", "masks", "extrinsics",
                  "truth_extrinsics", "frame_index", "output_root", "overlay_root"},
                 path, "paths");
      cfg.paths.mocap_log = resolve(base, p.value("mocap_log", ""));
      cfg.paths.board_observations = resolve(base, p.value("board_observations", ""));
      cfg.paths.meshes = resolve(base, p.value("meshes", ""));
      cfg.paths.masks = resolve(base, p.value("masks", ""));
      cfg.paths.extrinsics = resolve(base, p.value("extrinsics", ""));
      cfg.paths.truth_extrinsics = resolve(base, p.value("truth_extrinsics", ""));
      cfg.paths.frame_index = resolve(base, p.value("frame_index", ""));
      cfg.paths.output_root = resolve(base, p.value("output_root", ""));
      cfg.paths.overlay_root = resolve(base, p.value("overlay_root", ""));
    }

    if (doc.contains("board")) cfg.board = parse_board(doc["board"], path);

    if (doc.contains("cameras")) {
      if (!doc["cameras"].is_object()) fail(path, "cameras must be an object keyed by camera id");
      for (const auto& [id, entry] : doc["cameras"].items()) {
        if (id.empty()) fail(path, "camera ids must be non-empty");
        cfg.cameras.emplace(id, parse_camera(entry, path, id));
      }
    }

    if (doc.contains("tuning")) {
      const json& t = doc["tuning"];
      check_keys(t,
                 {"translation_range_mm", "translation_step_mm", "rotation_range_deg",
                  "rotation_step_deg", "candidate_cap", "coarse_to_fine", "iou_threshold"},
                 path, "tuning");
      cfg.grid.translation_range = t.value("translation_range_mm", cfg.grid.translation_range);
      cfg.grid.translation_step = t.value("translation_step_mm", cfg.grid.translation_step);
      cfg.grid.rotation_range = t.value("rotation_range_deg", cfg.grid.rotation_range);
      cfg.grid.rotation_step = t.value("rotation_step_deg", cfg.grid.rotation_step);
      cfg.grid.candidate_cap = t.value("candidate_cap", cfg.grid.candidate_cap);
      cfg.grid.coarse_to_fine = t.value("coarse_to_fine", cfg.grid.coarse_to_fine);
      cfg.iou_threshold = t.value("iou_threshold", cfg.iou_threshold);
    }
    cfg.grid.validate();
    if (!(cfg.iou_threshold > 0) || cfg.iou_threshold > 1)
      fail(path, "tuning.iou_threshold must be in (0, 1]");

    if (doc.contains("annotation")) {
      const json& a = doc["annotation"];
      check_keys(a, {"min_visible_pixels", "mock_depth_mm", "depth_scale", "sample_window_s"},
                 path, "annotation");
      cfg.annotation.min_visible_pixels =
          a.value("min_visible_pixels", cfg.annotation.min_visible_pixels);
      cfg.annotation.mock_depth_mm = a.value("mock_depth_mm", cfg.annotation.mock_depth_mm);
      cfg.annotation.depth_scale = a.value("depth_scale", cfg.annotation.depth_scale);
      cfg.sample_window_s = a.value("sample_window_s", cfg.sample_window_s);
    }
    if (cfg.annotation.min_visible_pixels < 0)
      fail(path, "annotation.min_visible_pixels must be non-negative");
    if (!(cfg.annotation.mock_depth_mm > 0)) fail(path, "annotation.mock_depth_mm must be positive");
    if (!(cfg.annotation.depth_scale > 0)) fail(path, "annotation.depth_scale must be positive");
    if (!(cfg.sample_window_s > 0)) fail(path, "annotation.sample_window_s must be positive");

    if (doc.contains("synth")) {
      const json& s = doc["synth"];
      check_keys(s, {"rig", "board_placements", "corner_noise_px", "tuning_samples_per_camera",
                     "scenarios"},
                 path, "synth");
      if (s.contains("rig")) {
        const json& r = s["rig"];
        check_keys(r, {"ring_radius_mm", "camera_height_mm", "target_mm", "position_jitter_mm"},
                   path, "synth.rig");
        cfg.rig.ring_radius_mm = r.value("ring_radius_mm", cfg.rig.ring_radius_mm);
        cfg.rig.camera_height_mm = r.value("camera_height_mm", cfg.rig.camera_height_mm);
        if (r.contains("target_mm"))
          cfg.rig.target = parse_vec3(r["target_mm"], path, "synth.rig.target_mm");
        cfg.rig.position_jitter_mm = r.value("position_jitter_mm", cfg.rig.position_jitter_mm);
      }
      cfg.board_placements = s.value("board_placements", cfg.board_placements);
      cfg.corner_noise_px = s.value("corner_noise_px", cfg.corner_noise_px);
      cfg.tuning_samples_per_camera =
          s.value("tuning_samples_per_camera", cfg.tuning_samples_per_camera);
      if (s.contains("scenarios")) {
        if (!s["scenarios"].is_array()) fail(path, "synth.scenarios must be an array");
        for (size_t i = 0; i < s["scenarios"].size(); ++i)
          cfg.scenarios.push_back(parse_scenario(s["scenarios"][i], path, i));
      }
    }
    if (cfg.board_placements < 1) fail(path, "synth.board_placements must be at least 1");
    if (cfg.corner_noise_px < 0) fail(path, "synth.corner_noise_px must be non-negative");
    if (cfg.tuning_samples_per_camera < 1)
      fail(path, "synth.tuning_samples_per_camera must be at least 1");

    cfg.workers = doc.value("workers", cfg.workers);
    if (cfg.workers < 0) fail(path, "workers must be non-negative");
    cfg.seed = doc.value("seed", cfg.seed);
  } catch (const json::exception& e) {
    throw Error(Errc::schema, path + ": " + e.what());
  }
  return cfg;
}

}  // namespace poselabel::pipeline
