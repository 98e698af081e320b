#pragma once

#include <vector>

#include "poselabel/geometry.hpp"

namespace poselabel::pnp {

/// 2D-3D correspondences for one camera. 3D points are in the mocap frame.
struct Correspondences {
  std::vector<Point3> world_points;  // mm
  std::vector<Point2> image_points;  // px
  CameraIntrinsics intrinsics;

  size_t size() const { return world_points.size(); }
};

struct PnPSolution {
  Pose pose;  // world -> camera; camera-in-world is its inverse
  double rms_reprojection_error = 0;  // px
  int iterations = 0;                 // accepted refinement steps
};

/// Linear DLT estimate of [R|t] from at least 6 non-coplanar points, with the
/// rotation snapped onto SO(3) by polar factorization and the sign fixed so
/// the point centroid lands at positive camera-frame z.
/// Throws Errc::too_few_points and Errc::degenerate_configuration.
Pose solve_dlt(const Correspondences& c);

/// Minimizes the sum of squared reprojection residuals over a local pose
/// perturbation (axis-angle for rotation, additive for translation) with
/// Levenberg-Marquardt damping; steps that increase the RMS are rejected.
/// Stops when the RMS change of an accepted step falls below `tol` (px) or
/// after `max_iter` accepted steps. Final RMS never exceeds the initial one.
/// Throws Errc::non_finite_residual when points fall behind the camera and
/// damping cannot recover.
PnPSolution refine_gauss_newton(const Correspondences& c, const Pose& init, int max_iter = 50,
                                double tol = 1e-8);

/// solve_dlt followed by refine_gauss_newton with default settings.
PnPSolution solve_pnp(const Correspondences& c);

/// RMS pixel distance between observations and reprojections; infinity when
/// any point lies at or behind the near plane.
double rms_reprojection_error(const Correspondences& c, const Pose& world_to_camera);

}  // namespace poselabel::pnp
