#pragma once

#include <string>
#include <vector>

#include "poselabel/geometry.hpp"
#include "poselabel/pnp.hpp"

namespace poselabel::board {

/// Checkerboard geometry. The board's mocap virtual origin sits at the upper
/// left outer corner; origin_offset is the position of the FIRST interior
/// intersection relative to that origin, in the board frame. The board frame
/// z-axis points out of the patterned face.
struct BoardSpec {
  int inner_cols = 10;  // interior intersections per row
  int inner_rows = 7;
  double square_size = 100.0;              // mm
  Vec3 origin_offset = {100.0, 100.0, 0};  // mm, first intersection in the board frame
  double board_width = 1189.0;             // mm
  double board_height = 841.0;             // mm

  int corner_count() const { return inner_cols * inner_rows; }
  void validate() const;
};

/// One tracked board placement: the board origin pose from the mocap system
/// plus the detected 2D intersections, row-major, matching grid_points_mc.
struct BoardObservation {
  Pose board_pose_mc;              // board virtual origin in the mocap frame
  std::vector<Point2> corners_2d;  // length inner_cols * inner_rows
  std::string camera_id;
  double timestamp = 0;  // seconds
};

/// Pose of the first interior intersection in the mocap frame: the board
/// origin pose composed with the identity-rotation offset transform.
Pose first_intersection_mc(const BoardSpec& spec, const Pose& board_pose_mc);

/// All interior intersections in the mocap frame, row-major; point (i,j) is
/// origin_offset + (j*square, i*square, 0) carried through the board pose.
std::vector<Point3> grid_points_mc(const BoardSpec& spec, const Pose& board_pose_mc);

/// Concatenates (grid_points_mc, corners_2d) pairs across observations in
/// order. Requires one shared camera_id and at least two placements whose
/// orientations differ by >= 5 degrees for some pair.
/// Throws Errc::mixed_cameras and Errc::insufficient_orientation_diversity.
pnp::Correspondences build_correspondences(const BoardSpec& spec,
                                           const std::vector<BoardObservation>& observations,
                                           const CameraIntrinsics& k);

/// Board observation file: one JSON document per camera, validated against
/// the board geometry (corner count) and intrinsics (corners within a
/// 10%-margin extended image rectangle).
std::vector<BoardObservation> load_observations(const std::string& path, const BoardSpec& spec,
                                                const CameraIntrinsics& k);

void save_observations(const std::string& path, const std::string& camera_id,
                       const std::vector<BoardObservation>& observations);

}  // namespace poselabel::board
