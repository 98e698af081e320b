#include "poselabel/pnp.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

#include "poselabel/errors.hpp"

namespace poselabel::pnp {

namespace {

constexpr double kCoplanarSingularRatio = 1e-3;

void check_input(const Correspondences& c) {
  if (c.world_points.size() != c.image_points.size())
    throw Error(Errc::invalid_argument, "correspondence list lengths differ");
  if (c.size() < 6)
    throw Error(Errc::too_few_points,
                "PnP needs at least 6 correspondences, got " + std::to_string(c.size()));
  // duplicate 3D points within 1e-6 mm, via a quantized grid
  std::unordered_set<uint64_t> seen;
  seen.reserve(c.size() * 2);
  for (const Point3& p : c.world_points) {
    if (!p.allFinite()) throw Error(Errc::invalid_argument, "non-finite 3D point");
    const auto q = [](double v) { return uint64_t(int64_t(std::llround(v * 1e6))); };
    uint64_t h = q(p.x()) * 0x9e3779b97f4a7c15ULL;
    h ^= q(p.y()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= q(p.z()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    if (!seen.insert(h).second)
      throw Error(Errc::degenerate_configuration, "duplicate 3D points in correspondences");
  }
}

// Observations in normalized camera coordinates, undistorted when the
// intrinsics carry radial coefficients.
std::vector<Vec2> normalized_observations(const Correspondences& c) {
  std::vector<Vec2> out(c.size());
  for (size_t i = 0; i < c.size(); ++i) {
    const Vec2 d((c.image_points[i].x() - c.intrinsics.cx) / c.intrinsics.fx,
                 (c.image_points[i].y() - c.intrinsics.cy) / c.intrinsics.fy);
    out[i] = c.intrinsics.undistort_normalized(d);
  }
  return out;
}

struct Centering {
  Vec3 centroid;
  double scale;  // RMS distance from centroid
};

Centering check_coplanarity(const std::vector<Point3>& pts) {
  Vec3 centroid = Vec3::Zero();
  for (const Point3& p : pts) centroid += p;
  centroid /= double(pts.size());
  Mat3 scatter = Mat3::Zero();
  for (const Point3& p : pts) {
    const Vec3 d = p - centroid;
    scatter += d * d.transpose();
  }
  // Singular values of the centered point matrix are the square roots of the
  // scatter eigenvalues.
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
  const double s_max = std::sqrt(std::max(0.0, eig.eigenvalues()(2)));
  const double s_min = std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
  if (s_max <= 0 || s_min < kCoplanarSingularRatio * s_max)
    throw Error(Errc::degenerate_configuration,
                "3D points are coplanar or rank-deficient (singular value ratio " +
                    std::to_string(s_max > 0 ? s_min / s_max : 0.0) + ")");
  const double rms = std::sqrt(scatter.trace() / double(pts.size()));
  return {centroid, rms > 0 ? rms : 1.0};
}

}  // namespace

double rms_reprojection_error(const Correspondences& c, const Pose& world_to_camera) {
  // Residuals are evaluated in undistorted pixel space: normalized
  // observations scaled back by the focal lengths.
  const std::vector<Vec2> obs = normalized_observations(c);
  double sum = 0;
  for (size_t i = 0; i < c.size(); ++i) {
    const Vec3 cam = transform_point(world_to_camera, c.world_points[i]);
    if (cam.z() <= kZNear) return std::numeric_limits<double>::infinity();
    const double du = c.intrinsics.fx * (cam.x() / cam.z() - obs[i].x());
    const double dv = c.intrinsics.fy * (cam.y() / cam.z() - obs[i].y());
    sum += du * du + dv * dv;
  }
  return std::sqrt(sum / double(c.size()));
}

Pose solve_dlt(const Correspondences& c) {
  check_input(c);
  const Centering norm = check_coplanarity(c.world_points);
  const std::vector<Vec2> obs = normalized_observations(c);

  // x ~ M [X';1] over Hartley-normalized points X' = (X - centroid) / scale.
  const size_t n = c.size();
  Eigen::MatrixXd a(2 * long(n), 12);
  for (size_t i = 0; i < n; ++i) {
    const Vec3 xp = (c.world_points[i] - norm.centroid) / norm.scale;
    const double X = xp.x(), Y = xp.y(), Z = xp.z();
    const double u = obs[i].x(), v = obs[i].y();
    a.row(2 * long(i)) << X, Y, Z, 1, 0, 0, 0, 0, -u * X, -u * Y, -u * Z, -u;
    a.row(2 * long(i) + 1) << 0, 0, 0, 0, X, Y, Z, 1, -v * X, -v * Y, -v * Z, -v;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const Eigen::VectorXd h = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> m;
  m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8), h(9), h(10), h(11);

  // Undo the normalization: X' = (X - centroid)/scale.
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() /= norm.scale;
  t.topRightCorner<3, 1>() = -norm.centroid / norm.scale;
  m = m * t;

  // Fix the global sign so the centroid has positive camera-frame depth.
  const Eigen::Vector4d centroid_h(norm.centroid.x(), norm.centroid.y(), norm.centroid.z(), 1);
  if ((m * centroid_h).z() < 0) m = -m;

  const Mat3 a3 = m.leftCols<3>();
  const Eigen::JacobiSVD<Mat3> rsvd(a3, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double det_uv = (rsvd.matrixU() * rsvd.matrixV().transpose()).determinant();
  Mat3 fix = Mat3::Identity();
  fix(2, 2) = det_uv < 0 ? -1 : 1;
  const Mat3 r = rsvd.matrixU() * fix * rsvd.matrixV().transpose();
  const double scale = rsvd.singularValues().mean();
  if (!(scale > 0) || !std::isfinite(scale))
    throw Error(Errc::degenerate_configuration, "DLT produced a singular projection");
  return Pose{Rotation::orthonormalized(r), m.rightCols<1>() / scale};
}

PnPSolution refine_gauss_newton(const Correspondences& c, const Pose& init, int max_iter,
                                double tol) {
  check_input(c);
  if (max_iter < 1) throw Error(Errc::invalid_argument, "max_iter must be >= 1");
  if (!init.translation.allFinite())
    throw Error(Errc::invalid_argument, "initial pose is not finite");
  const std::vector<Vec2> obs = normalized_observations(c);
  const double fx = c.intrinsics.fx, fy = c.intrinsics.fy;
  const size_t n = c.size();

  // Residuals and normal equations for the current pose. Returns false when
  // a point lies at or behind the near plane.
  auto evaluate = [&](const Pose& p, double& rms, Eigen::Matrix<double, 6, 6>* h,
                      Eigen::Matrix<double, 6, 1>* g) {
    double sum = 0;
    if (h) h->setZero();
    if (g) g->setZero();
    for (size_t i = 0; i < n; ++i) {
      const Vec3 rotated = p.rotation * c.world_points[i];
      const Vec3 cam = rotated + p.translation;
      if (cam.z() <= kZNear) return false;
      const double iz = 1.0 / cam.z();
      const Vec2 res(fx * (cam.x() * iz - obs[i].x()), fy * (cam.y() * iz - obs[i].y()));
      sum += res.squaredNorm();
      if (!h) continue;
      // d(residual)/d(camera point)
      Eigen::Matrix<double, 2, 3> jp;
      jp << fx * iz, 0, -fx * cam.x() * iz * iz, 0, fy * iz, -fy * cam.y() * iz * iz;
      // camera point under the left perturbation exp([w]) R X + t + u:
      // d/dw = -[R X]x, d/du = I
      Eigen::Matrix<double, 3, 6> jx;
      jx.leftCols<3>() << 0, rotated.z(), -rotated.y(), -rotated.z(), 0, rotated.x(),
          rotated.y(), -rotated.x(), 0;
      jx.rightCols<3>() = Mat3::Identity();
      const Eigen::Matrix<double, 2, 6> j = jp * jx;
      *h += j.transpose() * j;
      *g += j.transpose() * res;
    }
    rms = std::sqrt(sum / double(n));
    return true;
  };

  Pose pose = init;
  double rms = 0;
  Eigen::Matrix<double, 6, 6> h;
  Eigen::Matrix<double, 6, 1> g;
  if (!evaluate(pose, rms, &h, &g))
    throw Error(Errc::non_finite_residual, "initial pose puts points behind the camera");

  double lambda = 1e-3;
  constexpr double kLambdaMax = 1e12;
  int accepted = 0;
  for (int iter = 0; iter < max_iter;) {
    Eigen::Matrix<double, 6, 6> damped = h;
    for (int i = 0; i < 6; ++i) {
      const double d = h(i, i);
      damped(i, i) += lambda * (d > 0 ? d : 1.0);
    }
    const Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(-g);
    if (!delta.allFinite()) break;

    const Pose candidate{Rotation::from_axis_angle(delta.head<3>()) * pose.rotation,
                         pose.translation + delta.tail<3>()};
    double cand_rms = 0;
    if (evaluate(candidate, cand_rms, nullptr, nullptr) && cand_rms < rms) {
      const double change = rms - cand_rms;
      pose = candidate;
      rms = cand_rms;
      lambda = std::max(lambda / 10.0, 1e-12);
      ++accepted;
      ++iter;
      if (change < tol) break;
      double discard;
      evaluate(pose, discard, &h, &g);
    } else {
      lambda *= 10.0;
      if (lambda > kLambdaMax) {
        if (!std::isfinite(rms))
          throw Error(Errc::non_finite_residual, "refinement cannot recover a finite residual");
        break;  // converged as far as damping allows
      }
    }
  }
  return PnPSolution{pose, rms, accepted};
}

PnPSolution solve_pnp(const Correspondences& c) {
  return refine_gauss_newton(c, solve_dlt(c));
}

}  // namespace poselabel::pnp
