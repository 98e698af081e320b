#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "poselabel/annotate.hpp"
#include "poselabel/board.hpp"
#include "poselabel/calib.hpp"
#include "poselabel/geometry.hpp"
#include "poselabel/synth.hpp"

namespace poselabel::pipeline {

/// File and directory locations used by the commands. Relative entries are
/// resolved against the config file's directory at load time. Paths need not
/// exist at load; each command checks the ones it consumes (or creates).
struct PipelinePaths {
  std::string mocap_log;           // CSV pose log
  std::string board_observations;  // directory of <camera_id>.json files
  std::string meshes;              // directory of obj_NNNNNN.ply/.obj files
  std::string masks;               // tuning masks + samples.json manifest
  std::string extrinsics;          // localized/tuned extrinsics JSON
  std::string truth_extrinsics;    // ground-truth rig written by synth
  std::string frame_index;         // frames.json listing scene timestamps
  std::string output_root;         // BOP dataset root
  std::string overlay_root;        // overlay command output
};

/// Single JSON config file driving every command; flags override workers,
/// seed, overwrite and force.
struct PipelineConfig {
  PipelinePaths paths;
  board::BoardSpec board;
  std::map<std::string, CameraIntrinsics> cameras;

  calib::TuningGrid grid;
  double iou_threshold = 0.9;

  annotate::AnnotateOptions annotation;
  double sample_window_s = 0.02;

  // synth section
  synth::RigSpec rig;  // ring geometry; per-camera intrinsics come from `cameras`
  std::vector<synth::ScenarioSpec> scenarios;
  int board_placements = 20;
  double corner_noise_px = 0.3;
  int tuning_samples_per_camera = 1;

  int workers = 0;  // 0 = all available cores
  uint64_t seed = 1;
  bool overwrite = false;
  bool force = false;

  /// Parses and validates the file. Unknown keys are rejected so typos
  /// surface immediately. Throws Errc::io/parse/schema.
  static PipelineConfig load(const std::string& path);
};

}  // namespace poselabel::pipeline
