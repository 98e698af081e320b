#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "poselabel/calib.hpp"
#include "poselabel/geometry.hpp"
#include "poselabel/image_io.hpp"
#include "poselabel/mesh.hpp"
#include "poselabel/raster.hpp"

namespace poselabel::annotate {

/// One tracked object at one instant, in the mocap frame (H_obj^mc).
struct ObjectState {
  int object_id = 0;
  Pose pose_mc_obj;
  double timestamp = 0;  // seconds
};

/// Tight axis-aligned pixel rectangle; a single set pixel has w = h = 1.
struct BBox {
  int x = 0, y = 0, w = 0, h = 0;
};

/// One (camera, object) label: the object pose in the camera frame plus its
/// rendered silhouette and the tight box around it.
struct Annotation {
  int object_id = 0;
  Pose relative_pose;  // object in the camera frame (H_obj^cam)
  render::MaskImage mask;
  BBox bbox;
  long visible_pixel_count = 0;
};

/// Fully calibrated camera: where it sits and how it projects.
struct Camera {
  calib::CameraExtrinsics extrinsics;
  CameraIntrinsics intrinsics;
};

/// Rig keyed by camera id.
using Rig = std::map<std::string, Camera>;

struct AnnotateOptions {
  long min_visible_pixels = 32;
  double mock_depth_mm = 6000.0;
  double depth_scale = 1.0;
  int workers = 0;
};

/// One snapshot to annotate: which cameras fired and what the mocap system
/// reported at that instant.
struct SceneInput {
  int scene_id = 0;
  std::string scenario;  // grouping tag carried through to dataset stats
  std::vector<std::string> camera_ids;
  std::vector<ObjectState> objects;
};

/// Annotated snapshot. Views are sorted by camera id and numbered from 0;
/// annotations within a view are sorted by object id. `objects` keeps every
/// tracked state, including ones filtered from all views.
struct SceneRecord {
  int scene_id = 0;
  std::string scenario;
  double depth_scale = 1.0;
  struct View {
    int image_id = 0;
    std::string camera_id;
    CameraIntrinsics intrinsics;
    std::vector<Annotation> annotations;
    render::MaskImage aggregated_mask;  // union of the retained annotation masks
    imgio::Gray16 mock_depth;
    std::optional<imgio::Rgb8> rgb;  // synthetic preview image, when available
  };
  std::vector<View> views;
  std::vector<ObjectState> objects;
};

/// Object pose in the camera frame: invert(H_cam^mc) * H_obj^mc.
Pose relative_pose(const calib::CameraExtrinsics& cam, const ObjectState& obj);

/// Renders the object into the camera and fits its box. Returns nullopt
/// (filtered) when fewer than min_visible_pixels mask pixels survive, which
/// covers behind-camera and out-of-frame objects; no other path drops one.
std::optional<Annotation> annotate_object(const calib::CameraExtrinsics& cam,
                                          const CameraIntrinsics& k, const ObjectState& obj,
                                          const render::TriMesh& mesh,
                                          long min_visible_pixels = 32);

/// Minimal rectangle containing all set pixels; nullopt for an empty mask.
std::optional<BBox> fit_bbox(const render::MaskImage& mask);

/// 16-bit depth stand-in: round(fixed_distance / depth_scale) at mask pixels,
/// 0 elsewhere. Throws Errc::value_overflow when the quantized value does not
/// fit 16 bits.
imgio::Gray16 mock_depth(const render::MaskImage& aggregated, double fixed_distance_mm,
                         double depth_scale);

/// Runs annotate_object for every (camera, object) pair of the scene and
/// assembles views in sorted order. (camera, object) renders run in parallel;
/// assembly is sequential, so output is bit-stable for any worker count.
/// Throws Errc::missing_extrinsics for unknown camera ids and
/// Errc::missing_mesh for untracked meshes.
SceneRecord annotate_scene(const Rig& rig, const render::MeshStore& meshes,
                           const SceneInput& input, const AnnotateOptions& options = {});

/// Mocap pose log: per-object time series, sorted by timestamp.
/// CSV columns: timestamp_s, object_id, tx_mm, ty_mm, tz_mm, qx, qy, qz, qw.
struct MocapLog {
  std::map<int, std::vector<std::pair<double, Pose>>> tracks;

  static MocapLog load_csv(const std::string& path);
  void save_csv(const std::string& path) const;

  /// Nearest sample within +/- window_s of the query (ties resolve to the
  /// earlier sample); nullopt when the track is missing or out of window.
  std::optional<ObjectState> sample(int object_id, double timestamp,
                                    double window_s = 0.02) const;

  /// sample() over every track; objects without an in-window sample are
  /// omitted. Sorted by object id.
  std::vector<ObjectState> sample_all(double timestamp, double window_s = 0.02) const;

  std::vector<int> object_ids() const;
};

}  // namespace poselabel::annotate
