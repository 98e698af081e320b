#pragma once

#include <filesystem>
#include <string>

#include "poselabel/geometry.hpp"
#include "poselabel/synth.hpp"

namespace test_helpers {

using poselabel::Pose;
using poselabel::Rotation;
using poselabel::Vec3;

inline Pose random_pose(poselabel::synth::Rng& rng, double max_translation_mm = 2000.0) {
  const Vec3 axis = rng.unit_vector();
  const double angle = rng.uniform(0, 3.0);
  return Pose{Rotation::from_axis_angle(axis * angle),
              rng.in_box(Vec3::Zero(), Vec3::Constant(max_translation_mm))};
}

inline double rotation_error_rad(const Pose& a, const Pose& b) {
  return a.rotation.angle_to(b.rotation);
}

inline double translation_error_mm(const Pose& a, const Pose& b) {
  return (a.translation - b.translation).norm();
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("poselabel_test_" + tag + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& child = "") const {
    return child.empty() ? path_.string() : (path_ / child).string();
  }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path path_;
};

}  // namespace test_helpers
