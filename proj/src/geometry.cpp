#include "poselabel/geometry.hpp"

#include <cmath>

#include "poselabel/errors.hpp"

namespace poselabel {

namespace {

Mat3 polar_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

}  // namespace

double Rotation::orthonormality_drift(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Rotation Rotation::from_matrix(const Mat3& m) {
  if (!m.allFinite()) throw Error(Errc::invalid_argument, "rotation matrix has non-finite entries");
  if (orthonormality_drift(m) > 1e-6 || std::abs(m.determinant() - 1.0) > 1e-6)
    throw Error(Errc::invalid_argument, "matrix is not a proper rotation");
  if (orthonormality_drift(m) > 1e-9) return Rotation(polar_rotation(m));
  return Rotation(m);
}

Rotation Rotation::orthonormalized(const Mat3& m) {
  if (!m.allFinite()) throw Error(Errc::invalid_argument, "rotation matrix has non-finite entries");
  return Rotation(polar_rotation(m));
}

Rotation Rotation::from_quaternion(double qx, double qy, double qz, double qw) {
  Eigen::Quaterniond q(qw, qx, qy, qz);
  const double n = q.norm();
  if (!(n > 0) || !std::isfinite(n))
    throw Error(Errc::invalid_argument, "quaternion has zero or non-finite norm");
  q.normalize();
  return Rotation(q.toRotationMatrix());
}

Rotation Rotation::from_axis_angle(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle < 1e-300) return Rotation();
  return Rotation(Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix());
}

Rotation Rotation::about_x(double rad) { return from_axis_angle(Vec3::UnitX() * rad); }
Rotation Rotation::about_y(double rad) { return from_axis_angle(Vec3::UnitY() * rad); }
Rotation Rotation::about_z(double rad) { return from_axis_angle(Vec3::UnitZ() * rad); }

Eigen::Vector4d Rotation::quaternion_xyzw() const {
  Eigen::Quaterniond q(m_);
  q.normalize();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  return {q.x(), q.y(), q.z(), q.w()};
}

Vec3 Rotation::axis_angle() const {
  Eigen::AngleAxisd aa(m_);
  return aa.axis() * aa.angle();
}

Rotation Rotation::operator*(const Rotation& o) const {
  Mat3 p = m_ * o.m_;
  if (orthonormality_drift(p) > 1e-9) p = polar_rotation(p);
  return Rotation(p);
}

namespace {

// atan2 of the skew norm against the trace cosine: unlike acos of the trace,
// this keeps full precision for angles near zero (acos bottoms out around
// sqrt(machine epsilon) ~ 2e-8 there).
double rotation_angle_of(const Mat3& r) {
  const double c = (r.trace() - 1.0) / 2.0;
  const Vec3 skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(skew.norm() / 2.0, c);
}

}  // namespace

double Rotation::angle_to(const Rotation& o) const {
  return rotation_angle_of(m_.transpose() * o.m_);
}

double Rotation::angle() const { return rotation_angle_of(m_); }

Mat4 Pose::matrix() const {
  Mat4 h = Mat4::Identity();
  h.topLeftCorner<3, 3>() = rotation.matrix();
  h.topRightCorner<3, 1>() = translation;
  return h;
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Pose invert(const Pose& p) {
  Rotation rt = p.rotation.transposed();
  return Pose{rt, -(rt * p.translation)};
}

Point3 transform_point(const Pose& p, const Point3& x) {
  return p.rotation * x + p.translation;
}

CameraIntrinsics CameraIntrinsics::make(double fx, double fy, double cx, double cy,
                                        int width, int height, double k1, double k2) {
  CameraIntrinsics k{fx, fy, cx, cy, width, height, k1, k2};
  k.validate();
  return k;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw Error(Errc::invalid_argument, "focal lengths must be positive");
  if (width <= 0 || height <= 0)
    throw Error(Errc::invalid_argument, "image dimensions must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(k1) || !std::isfinite(k2))
    throw Error(Errc::invalid_argument, "intrinsics must be finite");
}

Mat3 CameraIntrinsics::k_matrix() const {
  Mat3 k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

Point2 CameraIntrinsics::project_camera_point(const Vec3& cam) const {
  double xn = cam.x() / cam.z();
  double yn = cam.y() / cam.z();
  if (k1 != 0 || k2 != 0) {
    const double r2 = xn * xn + yn * yn;
    const double d = 1.0 + r2 * (k1 + k2 * r2);
    xn *= d;
    yn *= d;
  }
  return {fx * xn + cx, fy * yn + cy};
}

Vec2 CameraIntrinsics::undistort_normalized(const Vec2& distorted) const {
  if (k1 == 0 && k2 == 0) return distorted;
  Vec2 u = distorted;
  for (int i = 0; i < 12; ++i) {
    const double r2 = u.squaredNorm();
    const double d = 1.0 + r2 * (k1 + k2 * r2);
    u = distorted / d;
  }
  return u;
}

std::optional<Point2> project(const CameraIntrinsics& k, const Pose& cam_from_point_frame,
                              const Point3& x) {
  const Vec3 cam = transform_point(cam_from_point_frame, x);
  if (cam.z() <= kZNear) return std::nullopt;
  return k.project_camera_point(cam);
}

}  // namespace poselabel
