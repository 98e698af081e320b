#pragma once

#include <map>
#include <string>
#include <vector>

#include "poselabel/annotate.hpp"

namespace poselabel::bop {

/// Dataset directory layout. Each scene is one snapshot: a directory named
/// with the 6-digit scene id holding rgb/, mask/, mask_visib/, depth/,
/// scene_camera.json, scene_gt.json, scene_gt_info.json and a cameras.json
/// sidecar mapping image ids to camera ids (plus the scene's object states
/// and scenario tag, so a scene directory is self-contained).
struct DatasetLayout {
  std::string root;

  std::string scene_dir(int scene_id) const;
  /// 6-digit zero-padded id, used for scene directories and file stems.
  static std::string padded(int id);
  std::string mask_path(int scene_id, int image_id, int annotation_index, bool visib) const;
  std::string depth_path(int scene_id, int image_id) const;
  std::string rgb_path(int scene_id, int image_id) const;

  /// Scene ids found under root (6-digit directories), ascending.
  std::vector<int> scene_ids() const;
};

/// Writes one scene directory: per-image cam_K + depth_scale into
/// scene_camera.json, per-annotation {obj_id, cam_R_m2c, cam_t_m2c} into
/// scene_gt.json and {bbox_obj, px_count_visib} into scene_gt_info.json,
/// masks into mask/ and mask_visib/ (identical copies), 16-bit mock depth
/// into depth/, preview images into rgb/ when present.
void write_scene(const annotate::SceneRecord& record, const DatasetLayout& layout);

/// Inverse of write_scene. Aggregated masks are rebuilt as the union of the
/// per-annotation masks. Unknown JSON keys are ignored. Requires the
/// cameras.json sidecar; throws Errc::schema naming the offending file/key.
annotate::SceneRecord read_scene(const DatasetLayout& layout, int scene_id);

struct Violation {
  std::string where;  // file or file:key context
  std::string message;
};

/// Structural checks over every scene: scene_camera/scene_gt/scene_gt_info
/// entries must match up, every referenced mask/depth file must exist with
/// camera dimensions, cam_R_m2c must be orthonormal within 1e-6, bboxes must
/// lie inside the image, and px_count_visib must equal the mask pixel count.
std::vector<Violation> validate(const DatasetLayout& layout);

struct DatasetStats {
  std::map<int, long> instances_per_class;
  long total_instances = 0;
  long total_frames = 0;  // images across scenes
  struct ScenarioCount {
    long instances = 0;
    long frames = 0;
  };
  std::map<std::string, ScenarioCount> per_scenario;
  double annotation_time_s = 0;

  DatasetStats& operator+=(const DatasetStats& o);
  friend DatasetStats operator+(DatasetStats a, const DatasetStats& b) { return a += b; }
};

DatasetStats stats(const DatasetLayout& layout);

/// Per-scenario table plus per-class counts, human readable.
std::string format_stats(const DatasetStats& s);

/// dataset_info.json at the root; records annotation wall time.
void write_dataset_info(const DatasetLayout& layout, double annotation_time_s);
/// 0 when the file is absent.
double read_annotation_time(const DatasetLayout& layout);

}  // namespace poselabel::bop
