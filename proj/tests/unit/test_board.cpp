#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "poselabel/board.hpp"
#include "poselabel/errors.hpp"
#include "poselabel/synth.hpp"

using namespace poselabel;
using test_helpers::random_pose;

namespace {
constexpr double kPi = std::numbers::pi;

board::BoardSpec small_board() {
  board::BoardSpec spec;
  spec.inner_cols = 3;
  spec.inner_rows = 3;
  spec.square_size = 100;
  spec.origin_offset = {50, 50, 0};
  spec.board_width = 500;
  spec.board_height = 400;
  return spec;
}

board::BoardObservation observation_for(const board::BoardSpec& spec, const Pose& board_pose,
                                        const Pose& cam_in_world, const CameraIntrinsics& k,
                                        const std::string& camera_id = "cam00") {
  board::BoardObservation obs;
  obs.board_pose_mc = board_pose;
  obs.camera_id = camera_id;
  const Pose world_to_cam = invert(cam_in_world);
  for (const Point3& p : board::grid_points_mc(spec, board_pose)) {
    const auto px = project(k, world_to_cam, p);
    REQUIRE(px.has_value());
    obs.corners_2d.push_back(*px);
  }
  return obs;
}

}  // namespace

TEST_SUITE_BEGIN("board");

TEST_CASE("first intersection under an identity board pose is the offset") {
  board::BoardSpec spec;
  spec.origin_offset = {70.1, 70.1, 0};
  const Pose p = board::first_intersection_mc(spec, Pose::identity());
  CHECK(p.translation.x() == doctest::Approx(70.1));
  CHECK(p.translation.y() == doctest::Approx(70.1));
  CHECK(p.translation.z() == doctest::Approx(0));
  CHECK(p.rotation.angle() < 1e-12);
}

TEST_CASE("a rotated board rotates the offset") {
  board::BoardSpec spec;
  spec.origin_offset = {250, 0, 0};
  const Pose board{Rotation::about_z(kPi / 2), Vec3::Zero()};
  const Pose p = board::first_intersection_mc(spec, board);
  CHECK(p.translation.x() == doctest::Approx(0).epsilon(1e-9));
  CHECK(p.translation.y() == doctest::Approx(250));
}

TEST_CASE("first intersection matches generic compose bit-exactly") {
  synth::Rng rng(51);
  board::BoardSpec spec;
  const Pose board_pose = random_pose(rng);
  const Pose direct = board::first_intersection_mc(spec, board_pose);
  const Pose via_compose = compose(board_pose, Pose::translation_only(spec.origin_offset));
  CHECK(direct.rotation.matrix() == via_compose.rotation.matrix());
  CHECK(direct.translation == via_compose.translation);
}

TEST_CASE("grid points form the expected planar lattice") {
  const auto spec = small_board();
  const auto points = board::grid_points_mc(spec, Pose::identity());
  REQUIRE(points.size() == 9);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Point3& p = points[size_t(i * 3 + j)];
      CHECK(p.x() == doctest::Approx(50 + 100 * j));
      CHECK(p.y() == doctest::Approx(50 + 100 * i));
      CHECK(p.z() == doctest::Approx(0));
    }
  }
}

TEST_CASE("grid points stay coplanar with the board plane") {
  synth::Rng rng(52);
  const auto spec = small_board();
  const Pose board_pose = random_pose(rng);
  const Vec3 normal = board_pose.rotation * Vec3{0, 0, 1};
  const auto points = board::grid_points_mc(spec, board_pose);
  const double d = normal.dot(points.front());
  for (const Point3& p : points) CHECK(std::abs(normal.dot(p) - d) < 1e-9);
}

TEST_CASE("horizontal neighbors are one square apart") {
  synth::Rng rng(53);
  const auto spec = small_board();
  const auto points = board::grid_points_mc(spec, random_pose(rng));
  for (int i = 0; i < spec.inner_rows; ++i)
    for (int j = 0; j + 1 < spec.inner_cols; ++j) {
      const size_t at = size_t(i * spec.inner_cols + j);
      CHECK(std::abs((points[at + 1] - points[at]).norm() - spec.square_size) < 1e-9);
    }
}

TEST_CASE("first intersection equals grid point zero") {
  synth::Rng rng(54);
  const auto spec = small_board();
  const Pose board_pose = random_pose(rng);
  const Pose first = board::first_intersection_mc(spec, board_pose);
  const auto points = board::grid_points_mc(spec, board_pose);
  CHECK(first.translation == points.front());
}

TEST_CASE("rigidly moving the board moves every grid point") {
  synth::Rng rng(55);
  const auto spec = small_board();
  const Pose board_pose = random_pose(rng);
  const Pose g = random_pose(rng);
  const auto base = board::grid_points_mc(spec, board_pose);
  const auto moved = board::grid_points_mc(spec, compose(g, board_pose));
  for (size_t i = 0; i < base.size(); ++i)
    CHECK((moved[i] - transform_point(g, base[i])).norm() < 1e-9);
}

TEST_CASE("correspondences concatenate observation blocks in order") {
  const auto k = CameraIntrinsics::make(1100, 1100, 648, 512, 1296, 1024);
  board::BoardSpec spec;  // 10x7 interior grid: 70 corners per placement
  const Pose cam_in_world{Rotation::about_y(kPi), Vec3{0, 0, 6000}};

  std::vector<board::BoardObservation> observations;
  for (int placement = 0; placement < 8; ++placement) {
    const Pose board{Rotation::about_x(0.3 * placement) * Rotation::about_y(0.2 * placement),
                     Vec3{-500.0 + 120 * placement, -400.0, 400.0}};
    observations.push_back(observation_for(spec, board, cam_in_world, k));
  }
  const auto c = board::build_correspondences(spec, observations, k);
  CHECK(c.size() == 8 * 70);
  for (int placement = 0; placement < 8; ++placement) {
    const auto points = board::grid_points_mc(spec, observations[size_t(placement)].board_pose_mc);
    for (int i = 0; i < 70; ++i) {
      CHECK(c.world_points[size_t(placement * 70 + i)] == points[size_t(i)]);
      CHECK(c.image_points[size_t(placement * 70 + i)] ==
            observations[size_t(placement)].corners_2d[size_t(i)]);
    }
  }

  SUBCASE("permuting observations permutes correspondence blocks") {
    auto shuffled = observations;
    std::swap(shuffled[0], shuffled[5]);
    const auto c2 = board::build_correspondences(spec, shuffled, k);
    CHECK(c2.world_points[0] == c.world_points[size_t(5 * 70)]);
    CHECK(c2.image_points[0] == c.image_points[size_t(5 * 70)]);
    CHECK(c2.world_points[size_t(5 * 70)] == c.world_points[0]);
  }

  SUBCASE("mixed camera ids are rejected") {
    auto mixed = observations;
    mixed[3].camera_id = "cam99";
    try {
      board::build_correspondences(spec, mixed, k);
      FAIL("expected mixed_cameras");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::mixed_cameras);
    }
  }

  SUBCASE("a single observation lacks orientation diversity") {
    std::vector<board::BoardObservation> one{observations[0]};
    try {
      board::build_correspondences(spec, one, k);
      FAIL("expected insufficient_orientation_diversity");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::insufficient_orientation_diversity);
    }
  }

  SUBCASE("same-orientation placements lack orientation diversity") {
    std::vector<board::BoardObservation> flat;
    for (int placement = 0; placement < 3; ++placement) {
      const Pose board{Rotation{}, Vec3{-400.0 + 150 * placement, -300.0, 400.0}};
      flat.push_back(observation_for(spec, board, cam_in_world, k));
    }
    try {
      board::build_correspondences(spec, flat, k);
      FAIL("expected insufficient_orientation_diversity");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::insufficient_orientation_diversity);
    }
  }
}

TEST_CASE("board spec validation") {
  board::BoardSpec bad = small_board();
  bad.inner_cols = 2;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = small_board();
  bad.square_size = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = small_board();
  bad.origin_offset = {600, 50, 0};  // outside board_width
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_NOTHROW(small_board().validate());
  CHECK_NOTHROW(board::BoardSpec{}.validate());
}

TEST_CASE("observation files round-trip") {
  test_helpers::TempDir tmp("board");
  const auto k = CameraIntrinsics::make(1100, 1100, 648, 512, 1296, 1024);
  board::BoardSpec spec;
  const Pose cam_in_world{Rotation::about_y(kPi), Vec3{0, 0, 6000}};

  std::vector<board::BoardObservation> observations;
  for (int placement = 0; placement < 3; ++placement) {
    const Pose board{Rotation::about_x(0.25 * placement), Vec3{-450, -350, 300.0 + 40 * placement}};
    auto obs = observation_for(spec, board, cam_in_world, k);
    obs.timestamp = 1.5 * placement;
    observations.push_back(obs);
  }

  const std::string path = tmp.str("cam00.json");
  board::save_observations(path, "cam00", observations);
  const auto loaded = board::load_observations(path, spec, k);
  REQUIRE(loaded.size() == observations.size());
  for (size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].camera_id == "cam00");
    CHECK(loaded[i].timestamp == doctest::Approx(observations[i].timestamp));
    CHECK(loaded[i].board_pose_mc.rotation.angle_to(observations[i].board_pose_mc.rotation) <
          1e-9);
    CHECK((loaded[i].board_pose_mc.translation - observations[i].board_pose_mc.translation)
              .norm() < 1e-9);
    REQUIRE(loaded[i].corners_2d.size() == observations[i].corners_2d.size());
    for (size_t j = 0; j < loaded[i].corners_2d.size(); ++j)
      CHECK((loaded[i].corners_2d[j] - observations[i].corners_2d[j]).norm() < 1e-9);
  }
}

TEST_CASE("corner counts and ranges are enforced on load") {
  test_helpers::TempDir tmp("board_bad");
  const auto k = CameraIntrinsics::make(1100, 1100, 648, 512, 1296, 1024);
  board::BoardSpec spec;
  const Pose cam_in_world{Rotation::about_y(kPi), Vec3{0, 0, 6000}};
  auto obs = observation_for(spec, Pose::translation_only({-450, -350, 300}), cam_in_world, k);

  SUBCASE("wrong corner count") {
    obs.corners_2d.pop_back();
    const std::string path = tmp.str("cam00.json");
    board::save_observations(path, "cam00", {obs});
    CHECK_THROWS_AS(board::load_observations(path, spec, k), Error);
  }
  SUBCASE("corner far outside the margin rectangle") {
    obs.corners_2d[0] = {-400, -400};  // beyond the 10% margin
    const std::string path = tmp.str("cam00.json");
    board::save_observations(path, "cam00", {obs});
    CHECK_THROWS_AS(board::load_observations(path, spec, k), Error);
  }
}

TEST_SUITE_END();
