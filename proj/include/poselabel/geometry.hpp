#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <optional>

// Frame and unit conventions used throughout:
//   - all lengths are millimeters, all angles radians unless a name says _deg
//   - camera frame: x right, y down, z forward along the optical axis
//   - pixel coordinates are continuous, origin at the top-left image corner,
//     pixel (i,j) covers [i,i+1)x[j,j+1) with its center at (i+0.5, j+0.5)
//   - quaternions at I/O boundaries are (qx, qy, qz, qw), w last, Hamilton

namespace poselabel {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

using Point2 = Vec2;  // pixels
using Point3 = Vec3;  // millimeters

/// Points closer than this to the camera plane are treated as behind it.
inline constexpr double kZNear = 1.0;  // mm

/// Proper orthonormal 3x3 rotation. Construction enforces
/// ||R^T R - I||_inf < 1e-9 and det(R) = 1 within 1e-9.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Accepts a matrix that is already a rotation within 1e-6 and snaps it
  /// onto SO(3). Throws Errc::invalid_argument otherwise.
  static Rotation from_matrix(const Mat3& m);

  /// Nearest rotation (polar factor) to an arbitrary matrix. Used by the
  /// DLT solver; does not reject far-from-orthonormal inputs.
  static Rotation orthonormalized(const Mat3& m);

  /// (qx, qy, qz, qw), w last, Hamilton. Normalizes before converting.
  static Rotation from_quaternion(double qx, double qy, double qz, double qw);

  /// Rodrigues vector: direction = axis, norm = angle in radians.
  static Rotation from_axis_angle(const Vec3& axis_angle);

  static Rotation about_x(double rad);
  static Rotation about_y(double rad);
  static Rotation about_z(double rad);

  const Mat3& matrix() const { return m_; }

  /// Canonical quaternion with qw >= 0, as (qx, qy, qz, qw).
  Eigen::Vector4d quaternion_xyzw() const;

  /// Rodrigues vector, angle in [0, pi].
  Vec3 axis_angle() const;

  Rotation transposed() const { return Rotation(Mat3(m_.transpose())); }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// Matrix product; re-orthonormalizes when accumulated drift exceeds 1e-9.
  Rotation operator*(const Rotation& o) const;

  /// Geodesic distance in radians.
  double angle_to(const Rotation& o) const;

  /// Rotation angle in radians, in [0, pi].
  double angle() const;

  /// ||R^T R - I||_inf, for drift checks.
  static double orthonormality_drift(const Mat3& m);

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

/// Rigid transform in SE(3): x_out = R * x_in + t. Equivalent to a 4x4
/// homogeneous matrix with bottom row (0,0,0,1).
struct Pose {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();  // mm

  static Pose identity() { return Pose{}; }

  static Pose from_quaternion(const Vec3& t, double qx, double qy, double qz, double qw) {
    return Pose{Rotation::from_quaternion(qx, qy, qz, qw), t};
  }

  static Pose translation_only(const Vec3& t) { return Pose{Rotation{}, t}; }

  Mat4 matrix() const;
};

/// Homogeneous-matrix product H_a * H_b.
Pose compose(const Pose& a, const Pose& b);

/// rotation = R^T, translation = -R^T t.
Pose invert(const Pose& p);

/// R * x + t.
Point3 transform_point(const Pose& p, const Point3& x);

/// Pinhole camera matrix K plus image size. Optional radial distortion
/// (k1, k2) is applied after perspective division; zero by default.
struct CameraIntrinsics {
  double fx = 0, fy = 0;  // focal lengths, px
  double cx = 0, cy = 0;  // principal point, px
  int width = 0, height = 0;
  double k1 = 0, k2 = 0;

  static CameraIntrinsics make(double fx, double fy, double cx, double cy, int width,
                               int height, double k1 = 0, double k2 = 0);

  Mat3 k_matrix() const;

  /// Projects a camera-frame point; assumes z > 0. Shared by project() and
  /// the rasterizer so the two stay consistent by construction.
  Point2 project_camera_point(const Vec3& cam) const;

  /// Inverse of the radial distortion on normalized image coordinates
  /// (fixed-point iteration; identity when k1 = k2 = 0).
  Vec2 undistort_normalized(const Vec2& distorted) const;

  bool in_frame(const Point2& px) const {
    return px.x() >= 0 && px.x() < width && px.y() >= 0 && px.y() < height;
  }

  void validate() const;
};

/// x = K [R|t] X with perspective division. `cam_from_point_frame` carries
/// points from x's frame into the camera frame. Returns std::nullopt when the
/// point lies at or behind the near plane (z <= kZNear). The result may lie
/// outside the image rectangle; callers filter.
std::optional<Point2> project(const CameraIntrinsics& k, const Pose& cam_from_point_frame,
                              const Point3& x);

}  // namespace poselabel
