#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "poselabel/board.hpp"
#include "poselabel/geometry.hpp"
#include "poselabel/raster.hpp"

namespace poselabel::calib {

struct CameraExtrinsics {
  std::string camera_id;
  Pose pose_mc_cam;  // camera in the mocap frame (H_cam^mc)
  double rms_reprojection_error = 0;  // px
  bool tuned = false;
  std::optional<double> tuning_score;  // mean IoU when tuned
};

/// Grid of local pose offsets searched by tune_camera. Rotations are
/// per-axis angles in degrees (applied as Rx * Ry * Rz), translations are
/// per-axis millimeters; every combination within range is a candidate.
struct TuningGrid {
  double translation_range = 50.0;  // +/- mm per axis
  double translation_step = 10.0;   // mm
  double rotation_range = 2.0;      // +/- degrees per axis
  double rotation_step = 0.5;       // degrees
  long candidate_cap = 1000000;
  bool coarse_to_fine = false;

  void validate() const;
  long candidate_count() const;
};

/// One pose offset of the grid, kept alongside its grid coordinates for
/// deterministic tie-breaking.
struct TuningOffset {
  double rx_deg = 0, ry_deg = 0, rz_deg = 0;  // degrees
  double tx = 0, ty = 0, tz = 0;              // mm

  Pose pose() const;
  double rotation_norm() const;     // radians, geodesic angle of the offset
  double translation_norm() const;  // mm
  /// Total order used to break score ties: (rotation, translation) norm
  /// lexicographically, then the raw 6-tuple.
  bool tie_breaks_before(const TuningOffset& o) const;
};

std::vector<TuningOffset> enumerate_offsets(const TuningGrid& grid);

/// Manually produced ground-truth sample: a binary mask for one image plus
/// the mocap-frame poses of the objects visible in it.
struct TuningSample {
  std::string image_id;
  std::string camera_id;
  render::MaskImage ground_truth_mask;
  std::vector<std::pair<int, Pose>> objects;  // (object_id, pose_mc_obj)
};

/// PnP over aggregated board observations; stores camera-in-world (the PnP
/// world->camera solution inverted). tuned is false until tune_camera runs.
CameraExtrinsics localize_camera(const board::BoardSpec& spec,
                                 const std::vector<board::BoardObservation>& observations,
                                 const CameraIntrinsics& k);

/// Intersection-over-union; 0 when both masks are empty.
double iou(const render::MaskImage& a, const render::MaskImage& b);

/// Exhaustive search over grid offsets applied in the camera's local frame.
/// Every candidate renders all sample objects and scores the mean IoU of the
/// aggregated render against each sample's ground-truth mask. Returns the
/// argmax candidate when its score reaches iou_threshold (tuned = true),
/// otherwise returns init unchanged. Deterministic regardless of evaluation
/// order or worker count. best_score, when given, receives the argmax score
/// whether or not it reached the threshold.
CameraExtrinsics tune_camera(const CameraExtrinsics& init, const TuningGrid& grid,
                             const std::vector<TuningSample>& samples,
                             const render::MeshStore& meshes, const CameraIntrinsics& k,
                             double iou_threshold = 0.9, int workers = 0,
                             double* best_score = nullptr);

/// Extrinsics file: one JSON object keyed by camera id.
void save_extrinsics(const std::string& path,
                     const std::map<std::string, CameraExtrinsics>& extrinsics);
std::map<std::string, CameraExtrinsics> load_extrinsics(const std::string& path);

}  // namespace poselabel::calib
