#include "poselabel/board.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "poselabel/errors.hpp"

namespace poselabel::board {

using nlohmann::json;

namespace {
constexpr double kMinOrientationDiversityRad = 5.0 * M_PI / 180.0;
}

void BoardSpec::validate() const {
  if (inner_cols < 3 || inner_rows < 3)
    throw Error(Errc::invalid_argument, "board needs at least a 3x3 interior grid");
  if (!(square_size > 0)) throw Error(Errc::invalid_argument, "square_size must be positive");
  if (!(board_width > 0) || !(board_height > 0))
    throw Error(Errc::invalid_argument, "board dimensions must be positive");
  if (origin_offset.x() < 0 || origin_offset.x() > board_width || origin_offset.y() < 0 ||
      origin_offset.y() > board_height || origin_offset.z() != 0)
    throw Error(Errc::invalid_argument, "origin_offset must lie on the board face");
}

Pose first_intersection_mc(const BoardSpec& spec, const Pose& board_pose_mc) {
  return compose(board_pose_mc, Pose::translation_only(spec.origin_offset));
}

std::vector<Point3> grid_points_mc(const BoardSpec& spec, const Pose& board_pose_mc) {
  std::vector<Point3> points;
  points.reserve(size_t(spec.corner_count()));
  for (int i = 0; i < spec.inner_rows; ++i)
    for (int j = 0; j < spec.inner_cols; ++j)
      points.push_back(transform_point(
          board_pose_mc,
          spec.origin_offset + Vec3(j * spec.square_size, i * spec.square_size, 0)));
  return points;
}

pnp::Correspondences build_correspondences(const BoardSpec& spec,
                                           const std::vector<BoardObservation>& observations,
                                           const CameraIntrinsics& k) {
  spec.validate();
  for (const BoardObservation& obs : observations) {
    if (obs.camera_id != observations.front().camera_id)
      throw Error(Errc::mixed_cameras, "observations span cameras '" +
                                           observations.front().camera_id + "' and '" +
                                           obs.camera_id + "'");
    if (obs.corners_2d.size() != size_t(spec.corner_count()))
      throw Error(Errc::schema,
                  "observation has " + std::to_string(obs.corners_2d.size()) +
                      " corners, board spec expects " + std::to_string(spec.corner_count()));
  }

  bool diverse = false;
  for (size_t i = 0; i < observations.size() && !diverse; ++i)
    for (size_t j = i + 1; j < observations.size() && !diverse; ++j)
      diverse = observations[i].board_pose_mc.rotation.angle_to(
                    observations[j].board_pose_mc.rotation) >= kMinOrientationDiversityRad;
  if (!diverse)
    throw Error(Errc::insufficient_orientation_diversity,
                "board placements lack orientation diversity (need two placements >= 5 deg "
                "apart, got " +
                    std::to_string(observations.size()) + " placement(s))");

  pnp::Correspondences c;
  c.intrinsics = k;
  c.world_points.reserve(observations.size() * size_t(spec.corner_count()));
  c.image_points.reserve(observations.size() * size_t(spec.corner_count()));
  for (const BoardObservation& obs : observations) {
    const std::vector<Point3> grid = grid_points_mc(spec, obs.board_pose_mc);
    c.world_points.insert(c.world_points.end(), grid.begin(), grid.end());
    c.image_points.insert(c.image_points.end(), obs.corners_2d.begin(), obs.corners_2d.end());
  }
  return c;
}

std::vector<BoardObservation> load_observations(const std::string& path, const BoardSpec& spec,
                                                const CameraIntrinsics& k) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, path + ": " + e.what());
  }

  const double margin_x = 0.1 * k.width;
  const double margin_y = 0.1 * k.height;
  std::vector<BoardObservation> out;
  try {
    const std::string camera_id = doc.at("camera_id").get<std::string>();
    for (const json& o : doc.at("observations")) {
      BoardObservation obs;
      obs.camera_id = camera_id;
      obs.timestamp = o.at("timestamp").get<double>();
      const json& pose = o.at("board_pose");
      const auto& t = pose.at("t");
      const auto& q = pose.at("q");
      obs.board_pose_mc = Pose::from_quaternion(
          Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()),
          q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
          q.at(3).get<double>());
      for (const json& c : o.at("corners")) {
        const Point2 px(c.at(0).get<double>(), c.at(1).get<double>());
        if (!px.allFinite() || px.x() < -margin_x || px.x() > k.width + margin_x ||
            px.y() < -margin_y || px.y() > k.height + margin_y)
          throw Error(Errc::schema, path + ": corner outside the margin-extended image");
        obs.corners_2d.push_back(px);
      }
      if (obs.corners_2d.size() != size_t(spec.corner_count()))
        throw Error(Errc::schema, path + ": observation has " +
                                      std::to_string(obs.corners_2d.size()) +
                                      " corners, expected " +
                                      std::to_string(spec.corner_count()));
      out.push_back(std::move(obs));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::schema, path + ": " + e.what());
  }
  return out;
}

void save_observations(const std::string& path, const std::string& camera_id,
                       const std::vector<BoardObservation>& observations) {
  json doc;
  doc["camera_id"] = camera_id;
  doc["observations"] = json::array();
  for (const BoardObservation& obs : observations) {
    json o;
    o["timestamp"] = obs.timestamp;
    o["board_pose"]["t"] = {obs.board_pose_mc.translation.x(), obs.board_pose_mc.translation.y(),
                            obs.board_pose_mc.translation.z()};
    const Eigen::Vector4d q = obs.board_pose_mc.rotation.quaternion_xyzw();
    o["board_pose"]["q"] = {q(0), q(1), q(2), q(3)};
    json corners = json::array();
    for (const Point2& c : obs.corners_2d) corners.push_back({c.x(), c.y()});
    o["corners"] = std::move(corners);
    doc["observations"].push_back(std::move(o));
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw Error(Errc::io, "write failed: " + path);
}

}  // namespace poselabel::board
