#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "poselabel/annotate.hpp"
#include "poselabel/board.hpp"
#include "poselabel/geometry.hpp"
#include "poselabel/mesh.hpp"

namespace poselabel::synth {

/// Deterministic random source. Draws raw bits from std::mt19937_64 and maps
/// them to doubles in-house, so generated fixtures are identical across
/// standard libraries and platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Box-Muller normal draw.
  double gaussian(double mean, double sigma);
  /// Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi);
  Vec3 in_box(const Vec3& center, const Vec3& half_extent);
  Vec3 unit_vector();

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0;
};

/// Camera ring around a ground-level workspace, all cameras aimed at the
/// target point with image y pointing downward in the world.
struct RigSpec {
  int camera_count = 8;
  double ring_radius_mm = 5000.0;
  double camera_height_mm = 3000.0;
  Vec3 target = {0, 0, 800.0};
  double position_jitter_mm = 150.0;  // breaks the perfect ring symmetry
  CameraIntrinsics intrinsics = CameraIntrinsics::make(1100, 1100, 648, 512, 1296, 1024);

  void validate() const;
};

/// One synthetic recording: which objects exist, how they move, how fast the
/// sensors sample, and how noisy the mocap log is. Deterministic given seed.
struct ScenarioSpec {
  std::string name = "default";
  int object_count = 3;  // objects moving simultaneously
  double duration_s = 4.0;
  double frame_rate_hz = 5.0;    // camera frames
  double mocap_rate_hz = 100.0;  // pose log
  double mocap_jitter_mm = 0.5;
  double mocap_jitter_deg = 0.05;
  double timestamp_jitter_s = 0.0005;
  double sample_window_s = 0.02;  // frame/pose association window
  long min_visible_pixels = 32;   // retention threshold mirrored by the oracle
  Vec3 workspace_center = {0, 0, 800.0};
  Vec3 workspace_half_extent = {800.0, 800.0, 400.0};
  double max_spin_deg_s = 30.0;
  int first_scene_id = 0;
  int first_object_id = 1;
  double start_time_s = 0;  // shifts log and frame timestamps, so several
                            // scenarios can share one mocap log
  uint64_t seed = 1;

  void validate() const;
};

/// Ground-truth pose expectation for one (camera, object) pair of a frame.
/// visible_pixel_count is the rendered silhouette size at the true pose;
/// pairs below the retention threshold are still listed so tests can check
/// the filtering decision itself.
struct OracleInstance {
  std::string camera_id;
  int object_id = 0;
  Pose relative_pose;  // object in camera frame, composed directly
  long visible_pixel_count = 0;
};

struct OracleFrame {
  int scene_id = 0;
  double timestamp = 0;
  std::vector<OracleInstance> instances;  // (camera_id, object_id) sorted
};

struct Recording {
  annotate::MocapLog log;
  std::vector<annotate::SceneInput> frames;  // sampled from log, scene ids ascending
  render::MeshStore meshes;
  std::vector<OracleFrame> oracle;
};

/// Deterministic ring of cameras; extrinsics are exact (rms 0, untuned).
annotate::Rig generate_rig(const RigSpec& spec, uint64_t seed);

/// Forward model of a calibration session: per camera, n_placements board
/// poses facing the camera. Placements are resampled until every corner
/// projects in front of the camera, at least 90% land strictly in-frame, and
/// the rest stay within the 10%-margin rectangle accepted by the board file
/// loader; sets of two or more placements are resampled until some pair
/// differs by >= 15 degrees. corner_noise_px is Gaussian per coordinate.
std::map<std::string, std::vector<board::BoardObservation>> generate_board_session(
    const annotate::Rig& rig, const board::BoardSpec& board, int n_placements,
    double corner_noise_px, uint64_t seed);

/// Axis-aligned cuboid centered at the origin, outward-facing triangles.
render::TriMesh make_box(int object_id, const Vec3& size_mm);

/// Slatted pallet-like solid (deck boards, stringers, bottom boards)
/// centered at the origin.
render::TriMesh make_pallet(int object_id, double length_mm, double width_mm, double height_mm);

/// Procedural object set with ids first_id .. first_id + count - 1: odd ids
/// are boxes, even ids pallets, sizes jittered deterministically from the
/// seed.
render::MeshStore make_object_set(int first_id, int count, uint64_t seed);

/// Waypoint trajectories sampled into a jittered mocap log plus the frame
/// inputs and per-frame oracle the verification suite compares against.
/// Scene inputs are produced by the same nearest-in-window sampling the
/// pipeline applies when it reads the log back.
Recording generate_recording(const annotate::Rig& rig, const ScenarioSpec& scenario);

}  // namespace poselabel::synth
