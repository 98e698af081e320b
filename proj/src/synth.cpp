#include "poselabel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "poselabel/errors.hpp"
#include "poselabel/raster.hpp"

namespace poselabel::synth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

/// Right-handed camera-in-world rotation looking along `forward` with image
/// y as close to world -z (down) as the geometry allows.
Rotation look_at_rotation(const Vec3& forward) {
  Vec3 z = forward.normalized();
  Vec3 down(0, 0, -1);
  Vec3 y = down - down.dot(z) * z;
  if (y.norm() < 1e-9) {
    // Looking straight up or down; fall back to world x as the image-y hint.
    Vec3 hint(1, 0, 0);
    y = hint - hint.dot(z) * z;
  }
  y.normalize();
  Vec3 x = y.cross(z);
  Mat3 m;
  m.col(0) = x;
  m.col(1) = y;
  m.col(2) = z;
  return Rotation::from_matrix(m);
}

struct Trajectory {
  std::vector<Vec3> waypoints;  // evenly spaced over [0, duration]
  double duration = 0;
  Rotation base;
  Vec3 spin_axis{0, 0, 1};
  double spin_rate_rad_s = 0;

  Pose at(double t) const {
    Vec3 position = waypoints.front();
    if (waypoints.size() > 1 && duration > 0) {
      double u = std::clamp(t / duration, 0.0, 1.0) * double(waypoints.size() - 1);
      size_t i = std::min(size_t(u), waypoints.size() - 2);
      double f = u - double(i);
      position = (1 - f) * waypoints[i] + f * waypoints[i + 1];
    }
    return Pose{base * Rotation::from_axis_angle(spin_axis * (spin_rate_rad_s * t)), position};
  }
};

Rotation random_rotation(Rng& rng) {
  return Rotation::from_axis_angle(rng.unit_vector() * rng.uniform(0, kPi));
}

void append_box(render::TriMesh& mesh, const Vec3& center, const Vec3& half) {
  int base = int(mesh.vertices.size());
  // Vertex i: bit 0 -> +x, bit 1 -> +y, bit 2 -> +z.
  for (int i = 0; i < 8; ++i) {
    Vec3 corner(center.x() + ((i & 1) ? half.x() : -half.x()),
                center.y() + ((i & 2) ? half.y() : -half.y()),
                center.z() + ((i & 4) ? half.z() : -half.z()));
    mesh.vertices.push_back(corner);
  }
  // Each face as two triangles, wound counter-clockwise seen from outside.
  const int quads[6][4] = {
      {1, 3, 7, 5},  // +x
      {0, 4, 6, 2},  // -x
      {2, 6, 7, 3},  // +y
      {0, 1, 5, 4},  // -y
      {4, 5, 7, 6},  // +z
      {0, 2, 3, 1},  // -z
  };
  for (const auto& q : quads) {
    mesh.triangles.push_back({base + q[0], base + q[1], base + q[2]});
    mesh.triangles.push_back({base + q[0], base + q[2], base + q[3]});
  }
}

}  // namespace

double Rng::uniform(double lo, double hi) {
  double u = double(gen_() >> 11) * 0x1.0p-53;  // [0, 1)
  return lo + u * (hi - lo);
}

double Rng::gaussian(double mean, double sigma) {
  if (have_spare_) {
    have_spare_ = false;
    return mean + sigma * spare_;
  }
  double u1 = double((gen_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  double u2 = double(gen_() >> 11) * 0x1.0p-53;        // [0, 1)
  double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  have_spare_ = true;
  return mean + sigma * r * std::cos(2.0 * kPi * u2);
}

int Rng::uniform_int(int lo, int hi) {
  return std::min(hi, lo + int(uniform(0, double(hi - lo) + 1)));
}

Vec3 Rng::in_box(const Vec3& center, const Vec3& half_extent) {
  return Vec3(center.x() + uniform(-half_extent.x(), half_extent.x()),
              center.y() + uniform(-half_extent.y(), half_extent.y()),
              center.z() + uniform(-half_extent.z(), half_extent.z()));
}

Vec3 Rng::unit_vector() {
  // Rejection-sample the unit ball to avoid corner bias.
  for (;;) {
    Vec3 v(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
    double n = v.norm();
    if (n > 1e-3 && n <= 1.0) return v / n;
  }
}

void RigSpec::validate() const {
  if (camera_count < 1) throw Error(Errc::invalid_argument, "rig needs at least one camera");
  if (!(ring_radius_mm > 0)) throw Error(Errc::invalid_argument, "ring radius must be positive");
  intrinsics.validate();
}

void ScenarioSpec::validate() const {
  if (object_count < 0) throw Error(Errc::invalid_argument, "object count must be non-negative");
  if (!(frame_rate_hz > 0) || !(mocap_rate_hz > 0))
    throw Error(Errc::invalid_argument, "frame and mocap rates must be positive");
  if (duration_s < 0) throw Error(Errc::invalid_argument, "duration must be non-negative");
  if (!(sample_window_s > 0)) throw Error(Errc::invalid_argument, "sample window must be positive");
}

annotate::Rig generate_rig(const RigSpec& spec, uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  annotate::Rig rig;
  for (int i = 0; i < spec.camera_count; ++i) {
    double angle = 2.0 * kPi * double(i) / double(spec.camera_count) + rng.uniform(-0.04, 0.04);
    Vec3 position(spec.ring_radius_mm * std::cos(angle) + rng.uniform(-1, 1) * spec.position_jitter_mm,
                  spec.ring_radius_mm * std::sin(angle) + rng.uniform(-1, 1) * spec.position_jitter_mm,
                  spec.camera_height_mm + rng.uniform(-1, 1) * spec.position_jitter_mm);

    char name[16];
    std::snprintf(name, sizeof(name), "cam%02d", i);
    annotate::Camera cam;
    cam.extrinsics.camera_id = name;
    cam.extrinsics.pose_mc_cam = Pose{look_at_rotation(spec.target - position), position};
    cam.extrinsics.rms_reprojection_error = 0;
    cam.extrinsics.tuned = false;
    cam.intrinsics = spec.intrinsics;
    rig.emplace(name, std::move(cam));
  }
  return rig;
}

std::map<std::string, std::vector<board::BoardObservation>> generate_board_session(
    const annotate::Rig& rig, const board::BoardSpec& board, int n_placements,
    double corner_noise_px, uint64_t seed) {
  board.validate();
  if (n_placements < 1)
    throw Error(Errc::invalid_argument, "board session needs at least one placement");
  Rng rng(seed);
  std::map<std::string, std::vector<board::BoardObservation>> sessions;

  for (const auto& [camera_id, cam] : rig) {
    const CameraIntrinsics& k = cam.intrinsics;
    const Pose cam_from_mc = invert(cam.extrinsics.pose_mc_cam);
    const Vec3 cam_position = cam.extrinsics.pose_mc_cam.translation;
    // Corners outside this rectangle would be rejected by the observation
    // file loader, so such placements are resampled.
    const double margin_x = 0.1 * k.width, margin_y = 0.1 * k.height;

    for (int attempt_set = 0; attempt_set < 100; ++attempt_set) {
      std::vector<board::BoardObservation> placements;
      for (int p = 0; p < n_placements; ++p) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
          Vec3 center = rng.in_box(Vec3(0, 0, board.board_height / 2 + 200), Vec3(600, 600, 400));
          Rotation facing = look_at_rotation(cam_position - center);
          Rotation tilt = Rotation::from_axis_angle(rng.unit_vector() * rng.uniform(0, 30 * kDegToRad));
          Rotation orientation = facing * tilt;
          // `center` is the middle of the physical board face; the stored
          // pose is the board-frame origin (a face corner).
          Vec3 origin = center - orientation.matrix() *
                                     Vec3(board.board_width / 2, board.board_height / 2, 0);
          Pose board_pose{orientation, origin};

          std::vector<Point3> grid = board::grid_points_mc(board, board_pose);
          int in_frame = 0;
          bool usable = true;
          std::vector<Point2> corners;
          corners.reserve(grid.size());
          for (const Point3& x : grid) {
            std::optional<Point2> px = project(k, cam_from_mc, x);
            if (!px || px->x() < -margin_x || px->x() >= k.width + margin_x ||
                px->y() < -margin_y || px->y() >= k.height + margin_y) {
              usable = false;
              break;
            }
            in_frame += k.in_frame(*px);
            corners.push_back(*px);
          }
          if (!usable || in_frame * 10 < int(grid.size()) * 9) continue;

          for (Point2& c : corners) {
            c.x() += rng.gaussian(0, corner_noise_px);
            c.y() += rng.gaussian(0, corner_noise_px);
          }
          placements.push_back(board::BoardObservation{board_pose, std::move(corners), camera_id,
                                                       double(p)});
          placed = true;
        }
        if (!placed)
          throw Error(Errc::degenerate_configuration,
                      "could not place a board in front of " + camera_id);
      }

      double max_pairwise = 0;
      for (size_t i = 0; i < placements.size(); ++i)
        for (size_t j = i + 1; j < placements.size(); ++j)
          max_pairwise = std::max(max_pairwise, placements[i].board_pose_mc.rotation.angle_to(
                                                    placements[j].board_pose_mc.rotation));
      if (n_placements == 1 || max_pairwise >= 15 * kDegToRad) {
        sessions.emplace(camera_id, std::move(placements));
        break;
      }
    }
    if (!sessions.count(camera_id))
      throw Error(Errc::degenerate_configuration,
                  "could not produce a diverse board session for " + camera_id);
  }
  return sessions;
}

render::TriMesh make_box(int object_id, const Vec3& size_mm) {
  render::TriMesh mesh;
  append_box(mesh, Vec3::Zero(), size_mm / 2);
  return render::finalize_mesh(std::move(mesh.vertices), std::move(mesh.triangles), object_id);
}

render::TriMesh make_pallet(int object_id, double length_mm, double width_mm, double height_mm) {
  render::TriMesh mesh;
  const double board_t = height_mm * 0.2;   // deck board thickness
  const double stringer_h = height_mm - 2 * board_t;
  const double top_z = height_mm / 2 - board_t / 2;
  const double bottom_z = -height_mm / 2 + board_t / 2;

  // 5 deck boards across the width, gaps between them.
  const int n_deck = 5;
  const double deck_w = width_mm / (2 * n_deck - 1);
  for (int i = 0; i < n_deck; ++i) {
    double y = -width_mm / 2 + deck_w / 2 + double(i) * 2 * deck_w;
    append_box(mesh, Vec3(0, y, top_z), Vec3(length_mm / 2, deck_w / 2, board_t / 2));
  }
  // 3 stringers along the width.
  const double stringer_w = length_mm * 0.08;
  for (double x : {-length_mm / 2 + stringer_w / 2, 0.0, length_mm / 2 - stringer_w / 2})
    append_box(mesh, Vec3(x, 0, 0), Vec3(stringer_w / 2, width_mm / 2, stringer_h / 2));
  // 3 bottom boards.
  for (double y : {-width_mm / 2 + deck_w / 2, 0.0, width_mm / 2 - deck_w / 2})
    append_box(mesh, Vec3(0, y, bottom_z), Vec3(length_mm / 2, deck_w / 2, board_t / 2));
  return render::finalize_mesh(std::move(mesh.vertices), std::move(mesh.triangles), object_id);
}

render::MeshStore make_object_set(int first_id, int count, uint64_t seed) {
  Rng rng(seed);
  render::MeshStore meshes;
  for (int id = first_id; id < first_id + count; ++id) {
    double scale = rng.uniform(0.8, 1.2);
    if (id % 2 == 1) {
      meshes.emplace(id, make_box(id, scale * Vec3(420, 320, 260)));
    } else {
      meshes.emplace(id, make_pallet(id, 620 * scale, 420 * scale, 90 * scale));
    }
  }
  return meshes;
}

Recording generate_recording(const annotate::Rig& rig, const ScenarioSpec& scenario) {
  scenario.validate();
  Rng rng(scenario.seed);
  Recording rec;
  rec.meshes = make_object_set(scenario.first_object_id, scenario.object_count, scenario.seed);

  // Waypoint trajectories, one per object.
  std::map<int, Trajectory> trajectories;
  int n_waypoints = std::max<int>(2, int(std::ceil(scenario.duration_s / 2.0)) + 1);
  for (int id = scenario.first_object_id; id < scenario.first_object_id + scenario.object_count;
       ++id) {
    Trajectory traj;
    traj.duration = scenario.duration_s;
    for (int w = 0; w < n_waypoints; ++w)
      traj.waypoints.push_back(rng.in_box(scenario.workspace_center, scenario.workspace_half_extent));
    traj.base = random_rotation(rng);
    traj.spin_axis = rng.unit_vector();
    traj.spin_rate_rad_s = rng.uniform(-1, 1) * scenario.max_spin_deg_s * kDegToRad;
    trajectories.emplace(id, std::move(traj));
  }

  // Mocap log: jittered clock, jittered poses. Times are scenario-local plus
  // start_time_s, so logs of several scenarios can be merged.
  for (long tick = 0;; ++tick) {
    double t_ideal = double(tick) / scenario.mocap_rate_hz;
    if (t_ideal >= scenario.duration_s) break;
    for (auto& [id, traj] : trajectories) {
      double t = t_ideal + rng.gaussian(0, scenario.timestamp_jitter_s);
      t = std::max(0.0, t);
      Pose truth = traj.at(t);
      Vec3 jitter_t(rng.gaussian(0, scenario.mocap_jitter_mm),
                    rng.gaussian(0, scenario.mocap_jitter_mm),
                    rng.gaussian(0, scenario.mocap_jitter_mm));
      Vec3 jitter_r(rng.gaussian(0, scenario.mocap_jitter_deg * kDegToRad),
                    rng.gaussian(0, scenario.mocap_jitter_deg * kDegToRad),
                    rng.gaussian(0, scenario.mocap_jitter_deg * kDegToRad));
      Pose logged{truth.rotation * Rotation::from_axis_angle(jitter_r),
                  truth.translation + jitter_t};
      rec.log.tracks[id].emplace_back(scenario.start_time_s + t, logged);
    }
  }
  for (auto& [id, track] : rec.log.tracks)
    std::stable_sort(track.begin(), track.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<std::string> camera_ids;
  for (const auto& [id, cam] : rig) camera_ids.push_back(id);

  // Frames sample the log exactly the way the pipeline will.
  for (long frame = 0;; ++frame) {
    double t_local = double(frame) / scenario.frame_rate_hz;
    if (t_local >= scenario.duration_s) break;
    double t = scenario.start_time_s + t_local;
    annotate::SceneInput input;
    input.scene_id = scenario.first_scene_id + int(frame);
    input.scenario = scenario.name;
    input.camera_ids = camera_ids;
    input.objects = rec.log.sample_all(t, scenario.sample_window_s);

    OracleFrame oracle;
    oracle.scene_id = input.scene_id;
    oracle.timestamp = t;
    for (const std::string& camera_id : camera_ids) {
      const annotate::Camera& cam = rig.at(camera_id);
      const Pose cam_from_mc = invert(cam.extrinsics.pose_mc_cam);
      for (const annotate::ObjectState& obj : input.objects) {
        OracleInstance inst;
        inst.camera_id = camera_id;
        inst.object_id = obj.object_id;
        inst.relative_pose = compose(cam_from_mc, obj.pose_mc_obj);
        inst.visible_pixel_count =
            render::rasterize_mask(rec.meshes.at(obj.object_id), inst.relative_pose, cam.intrinsics)
                .count();
        oracle.instances.push_back(std::move(inst));
      }
    }
    rec.frames.push_back(std::move(input));
    rec.oracle.push_back(std::move(oracle));
  }
  return rec;
}

}  // namespace poselabel::synth
