#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "helpers.hpp"
#include "poselabel/board.hpp"
#include "poselabel/calib.hpp"
#include "poselabel/errors.hpp"
#include "poselabel/raster.hpp"
#include "poselabel/synth.hpp"

using namespace poselabel;

namespace {
constexpr double kPi = std::numbers::pi;

synth::RigSpec small_rig_spec(int cameras) {
  synth::RigSpec spec;
  spec.camera_count = cameras;
  spec.intrinsics = CameraIntrinsics::make(275, 275, 162, 128, 324, 256);
  return spec;
}

synth::ScenarioSpec small_scenario(uint64_t seed) {
  synth::ScenarioSpec scenario;
  scenario.name = "unit";
  scenario.object_count = 2;
  scenario.duration_s = 2;
  scenario.frame_rate_hz = 5;
  scenario.mocap_rate_hz = 50;
  scenario.seed = seed;
  return scenario;
}
}  // namespace

TEST_SUITE_BEGIN("synth");

TEST_CASE("rng streams are deterministic and well-ranged") {
  synth::Rng a(42), b(42), c(43);
  bool any_differs = false;
  for (int i = 0; i < 1000; ++i) {
    const double ua = a.uniform(-3, 7);
    const double ub = b.uniform(-3, 7);
    CHECK(ua == ub);  // bit-identical
    CHECK(ua >= -3);
    CHECK(ua < 7);
    any_differs |= ua != c.uniform(-3, 7);
  }
  CHECK(any_differs);

  synth::Rng g1(9), g2(9);
  for (int i = 0; i < 100; ++i) CHECK(g1.gaussian(2, 0.5) == g2.gaussian(2, 0.5));

  synth::Rng v(7);
  for (int i = 0; i < 200; ++i) CHECK(v.unit_vector().norm() == doctest::Approx(1.0).epsilon(1e-12));

  synth::Rng d(11);
  std::set<int> seen;
  for (int i = 0; i < 400; ++i) {
    const int n = d.uniform_int(2, 5);
    CHECK(n >= 2);
    CHECK(n <= 5);
    seen.insert(n);
  }
  CHECK(seen.size() == 4);  // all values reachable

  synth::Rng box(13);
  for (int i = 0; i < 100; ++i) {
    const Vec3 p = box.in_box({10, -5, 800}, {100, 50, 25});
    CHECK(std::abs(p.x() - 10) <= 100);
    CHECK(std::abs(p.y() + 5) <= 50);
    CHECK(std::abs(p.z() - 800) <= 25);
  }
}

TEST_CASE("generate_rig builds a ring of distinct inward-facing cameras") {
  const synth::RigSpec spec = small_rig_spec(8);
  const annotate::Rig rig = synth::generate_rig(spec, 3);
  REQUIRE(rig.size() == 8);

  std::vector<std::string> ids;
  for (const auto& [id, cam] : rig) ids.push_back(id);
  CHECK(ids == std::vector<std::string>{"cam00", "cam01", "cam02", "cam03", "cam04", "cam05",
                                        "cam06", "cam07"});

  std::vector<Vec3> positions;
  for (const auto& [id, cam] : rig) {
    const Pose& pose = cam.extrinsics.pose_mc_cam;
    positions.push_back(pose.translation);

    // Every optical axis passes through the rig target.
    const Vec3 axis = pose.rotation * Vec3(0, 0, 1);
    const Vec3 to_target = (spec.target - pose.translation).normalized();
    CHECK(axis.dot(to_target) == doctest::Approx(1.0).epsilon(1e-9));

    // Positions stay near the commanded ring.
    const double radial =
        std::hypot(pose.translation.x(), pose.translation.y());
    CHECK(std::abs(radial - spec.ring_radius_mm) < spec.position_jitter_mm * 2 + 250);
    CHECK(std::abs(pose.translation.z() - spec.camera_height_mm) <= spec.position_jitter_mm);

    CHECK(cam.extrinsics.tuned == false);
    CHECK(cam.intrinsics.width == 324);
  }
  for (size_t i = 0; i < positions.size(); ++i)
    for (size_t j = i + 1; j < positions.size(); ++j)
      CHECK((positions[i] - positions[j]).norm() > 1000);

  SUBCASE("same seed reproduces the rig bit-for-bit") {
    const annotate::Rig again = synth::generate_rig(spec, 3);
    for (const auto& [id, cam] : rig) {
      const auto& other = again.at(id);
      CHECK(other.extrinsics.pose_mc_cam.rotation.matrix() ==
            cam.extrinsics.pose_mc_cam.rotation.matrix());
      CHECK(other.extrinsics.pose_mc_cam.translation == cam.extrinsics.pose_mc_cam.translation);
    }
  }
  SUBCASE("a different seed moves the cameras") {
    const annotate::Rig other = synth::generate_rig(spec, 4);
    CHECK((other.at("cam00").extrinsics.pose_mc_cam.translation -
           rig.at("cam00").extrinsics.pose_mc_cam.translation)
              .norm() > 1e-9);
  }
  SUBCASE("single-camera rigs are fine") {
    const annotate::Rig solo = synth::generate_rig(small_rig_spec(1), 5);
    CHECK(solo.size() == 1);
    CHECK(solo.count("cam00") == 1);
  }
  SUBCASE("invalid specs are rejected") {
    synth::RigSpec bad = spec;
    bad.camera_count = 0;
    CHECK_THROWS_AS(synth::generate_rig(bad, 1), Error);
    bad = spec;
    bad.ring_radius_mm = 0;
    CHECK_THROWS_AS(synth::generate_rig(bad, 1), Error);
  }
}

TEST_CASE("board sessions are diverse, framed, and localizable") {
  const annotate::Rig rig = synth::generate_rig(small_rig_spec(2), 21);
  board::BoardSpec board;

  SUBCASE("noiseless sessions localize back to the truth") {
    const auto sessions = synth::generate_board_session(rig, board, 8, 0.0, 77);
    REQUIRE(sessions.size() == 2);
    for (const auto& [camera_id, observations] : sessions) {
      REQUIRE(observations.size() == 8);
      const annotate::Camera& cam = rig.at(camera_id);

      double max_pairwise = 0;
      for (size_t i = 0; i < observations.size(); ++i) {
        CHECK(int(observations[i].corners_2d.size()) == board.corner_count());
        CHECK(observations[i].camera_id == camera_id);
        int in_frame = 0;
        for (const Point2& c : observations[i].corners_2d)
          in_frame += cam.intrinsics.in_frame(c);
        CHECK(in_frame * 10 >= board.corner_count() * 9);  // >= 90 % inside the image
        for (size_t j = i + 1; j < observations.size(); ++j)
          max_pairwise = std::max(max_pairwise, observations[i].board_pose_mc.rotation.angle_to(
                                                    observations[j].board_pose_mc.rotation));
      }
      CHECK(max_pairwise >= 15 * kPi / 180 - 1e-12);

      const calib::CameraExtrinsics solved =
          calib::localize_camera(board, observations, cam.intrinsics);
      CHECK(test_helpers::rotation_error_rad(solved.pose_mc_cam, cam.extrinsics.pose_mc_cam) <
            1e-6);
      CHECK(test_helpers::translation_error_mm(solved.pose_mc_cam, cam.extrinsics.pose_mc_cam) <
            1e-3);
      CHECK(solved.rms_reprojection_error < 1e-6);
    }
  }

  SUBCASE("sessions are seed-deterministic") {
    const auto a = synth::generate_board_session(rig, board, 4, 0.3, 99);
    const auto b = synth::generate_board_session(rig, board, 4, 0.3, 99);
    REQUIRE(a.size() == b.size());
    for (const auto& [camera_id, observations] : a) {
      const auto& other = b.at(camera_id);
      REQUIRE(other.size() == observations.size());
      for (size_t i = 0; i < observations.size(); ++i) {
        CHECK(other[i].corners_2d == observations[i].corners_2d);
        CHECK(other[i].board_pose_mc.translation == observations[i].board_pose_mc.translation);
      }
    }
  }

  SUBCASE("placement counts are validated") {
    CHECK_THROWS_AS(synth::generate_board_session(rig, board, 0, 0.0, 1), Error);
  }
}

TEST_CASE("recordings have the right shape and timestamps") {
  const annotate::Rig rig = synth::generate_rig(small_rig_spec(2), 31);
  const synth::ScenarioSpec scenario = small_scenario(8);
  const synth::Recording rec = synth::generate_recording(rig, scenario);

  // 2 s at 5 Hz -> frames at t = 0.0, 0.2, ..., 1.8.
  REQUIRE(rec.frames.size() == 10);
  REQUIRE(rec.oracle.size() == 10);
  CHECK(rec.meshes.size() == 2);
  CHECK(rec.meshes.count(1) == 1);
  CHECK(rec.meshes.count(2) == 1);

  // 2 s of mocap at 50 Hz -> 100 samples per track.
  REQUIRE(rec.log.tracks.size() == 2);
  for (const auto& [id, track] : rec.log.tracks) {
    CHECK(track.size() == 100);
    for (size_t i = 1; i < track.size(); ++i) CHECK(track[i - 1].first <= track[i].first);
  }

  for (size_t f = 0; f < rec.frames.size(); ++f) {
    const auto& frame = rec.frames[f];
    const auto& oracle = rec.oracle[f];
    CHECK(frame.scene_id == int(f));
    CHECK(oracle.scene_id == int(f));
    CHECK(oracle.timestamp == doctest::Approx(double(f) / 5.0).epsilon(1e-15));
    CHECK(frame.scenario == "unit");
    CHECK(frame.camera_ids == std::vector<std::string>{"cam00", "cam01"});
    REQUIRE(frame.objects.size() == 2);
    CHECK(frame.objects[0].object_id == 1);
    CHECK(frame.objects[1].object_id == 2);

    // One oracle instance per (camera, object), ordered by camera then object.
    REQUIRE(oracle.instances.size() == 4);
    CHECK(oracle.instances[0].camera_id == "cam00");
    CHECK(oracle.instances[0].object_id == 1);
    CHECK(oracle.instances[1].object_id == 2);
    CHECK(oracle.instances[2].camera_id == "cam01");

    for (const auto& obj : frame.objects) {
      const Vec3 d = obj.pose_mc_obj.translation - scenario.workspace_center;
      CHECK(std::abs(d.x()) <= scenario.workspace_half_extent.x() + 5);
      CHECK(std::abs(d.y()) <= scenario.workspace_half_extent.y() + 5);
      CHECK(std::abs(d.z()) <= scenario.workspace_half_extent.z() + 5);
    }
  }
}

TEST_CASE("the oracle agrees with an independent replay of the log") {
  const annotate::Rig rig = synth::generate_rig(small_rig_spec(2), 32);
  const synth::ScenarioSpec scenario = small_scenario(9);
  const synth::Recording rec = synth::generate_recording(rig, scenario);

  long checked = 0;
  for (const auto& oracle : rec.oracle) {
    for (const auto& inst : oracle.instances) {
      const annotate::Camera& cam = rig.at(inst.camera_id);
      const auto sampled =
          rec.log.sample(inst.object_id, oracle.timestamp, scenario.sample_window_s);
      REQUIRE(sampled.has_value());

      // Chain closure: camera pose composed with the relative pose recovers
      // the logged object pose.
      const Pose reconstructed = compose(cam.extrinsics.pose_mc_cam, inst.relative_pose);
      CHECK(reconstructed.rotation.angle_to(sampled->pose_mc_obj.rotation) < 1e-12);
      CHECK((reconstructed.translation - sampled->pose_mc_obj.translation).norm() < 1e-9);

      // Pixel counts come from the same rasterizer under the same pose.
      const auto mask = render::rasterize_mask(rec.meshes.at(inst.object_id), inst.relative_pose,
                                               cam.intrinsics);
      CHECK(mask.count() == inst.visible_pixel_count);
      ++checked;
    }
  }
  CHECK(checked == 40);
}

TEST_CASE("recordings are seed-deterministic") {
  const annotate::Rig rig = synth::generate_rig(small_rig_spec(1), 33);
  const synth::ScenarioSpec scenario = small_scenario(10);
  const synth::Recording a = synth::generate_recording(rig, scenario);
  const synth::Recording b = synth::generate_recording(rig, scenario);

  REQUIRE(a.log.tracks.size() == b.log.tracks.size());
  for (const auto& [id, track] : a.log.tracks) {
    const auto& other = b.log.tracks.at(id);
    REQUIRE(other.size() == track.size());
    for (size_t i = 0; i < track.size(); ++i) {
      CHECK(other[i].first == track[i].first);  // bit-identical timestamps
      CHECK(other[i].second.translation == track[i].second.translation);
      CHECK(other[i].second.rotation.matrix() == track[i].second.rotation.matrix());
    }
  }
  REQUIRE(a.oracle.size() == b.oracle.size());
  for (size_t f = 0; f < a.oracle.size(); ++f)
    for (size_t i = 0; i < a.oracle[f].instances.size(); ++i)
      CHECK(a.oracle[f].instances[i].visible_pixel_count ==
            b.oracle[f].instances[i].visible_pixel_count);

  synth::ScenarioSpec different = scenario;
  different.seed = 11;
  const synth::Recording c = synth::generate_recording(rig, different);
  CHECK((c.log.tracks.at(1)[0].second.translation - a.log.tracks.at(1)[0].second.translation)
            .norm() > 1e-6);
}

TEST_CASE("scenario chaining offsets ids and clocks") {
  const annotate::Rig rig = synth::generate_rig(small_rig_spec(1), 34);
  synth::ScenarioSpec scenario = small_scenario(12);
  scenario.first_scene_id = 40;
  scenario.first_object_id = 7;
  scenario.start_time_s = 100;

  const synth::Recording rec = synth::generate_recording(rig, scenario);
  REQUIRE(rec.frames.size() == 10);
  CHECK(rec.frames.front().scene_id == 40);
  CHECK(rec.frames.back().scene_id == 49);
  CHECK(rec.oracle.front().timestamp == doctest::Approx(100.0));
  CHECK(rec.meshes.count(7) == 1);
  CHECK(rec.meshes.count(8) == 1);
  CHECK(rec.meshes.count(1) == 0);
  for (const auto& [id, track] : rec.log.tracks) {
    CHECK((id == 7 || id == 8));
    for (const auto& [t, pose] : track) CHECK(t >= 100.0);
  }
}

TEST_CASE("a zero-duration scenario yields an empty but valid recording") {
  const annotate::Rig rig = synth::generate_rig(small_rig_spec(1), 35);
  synth::ScenarioSpec scenario = small_scenario(13);
  scenario.duration_s = 0;
  const synth::Recording rec = synth::generate_recording(rig, scenario);
  CHECK(rec.frames.empty());
  CHECK(rec.oracle.empty());
  CHECK(rec.log.tracks.empty());
  CHECK(rec.meshes.size() == 2);
}

TEST_CASE("scenario validation rejects bad values") {
  synth::ScenarioSpec scenario = small_scenario(1);
  scenario.duration_s = -1;
  CHECK_THROWS_AS(scenario.validate(), Error);
  scenario = small_scenario(1);
  scenario.frame_rate_hz = 0;
  CHECK_THROWS_AS(scenario.validate(), Error);
  scenario = small_scenario(1);
  scenario.mocap_rate_hz = -5;
  CHECK_THROWS_AS(scenario.validate(), Error);
  scenario = small_scenario(1);
  scenario.object_count = -1;
  CHECK_THROWS_AS(scenario.validate(), Error);
  scenario = small_scenario(1);
  scenario.sample_window_s = 0;
  CHECK_THROWS_AS(scenario.validate(), Error);
}

TEST_CASE("procedural meshes are well-formed") {
  const render::TriMesh box = synth::make_box(3, {600, 400, 200});
  CHECK(box.object_id == 3);
  CHECK(box.vertices.size() == 8);
  CHECK(box.triangles.size() == 12);
  CHECK(box.degenerate_dropped == 0);
  for (const Point3& v : box.vertices) {
    CHECK(std::abs(v.x()) == doctest::Approx(300.0));
    CHECK(std::abs(v.y()) == doctest::Approx(200.0));
    CHECK(std::abs(v.z()) == doctest::Approx(100.0));
  }
  for (const auto& tri : box.triangles)
    for (int idx : tri) {
      CHECK(idx >= 0);
      CHECK(idx < int(box.vertices.size()));
    }

  const render::TriMesh pallet = synth::make_pallet(4, 1200, 800, 150);
  CHECK(pallet.object_id == 4);
  CHECK(pallet.triangles.size() > 12);  // more structure than a plain box
  CHECK(pallet.degenerate_dropped == 0);
  for (const auto& tri : pallet.triangles)
    for (int idx : tri) {
      CHECK(idx >= 0);
      CHECK(idx < int(pallet.vertices.size()));
    }
  for (const Point3& v : pallet.vertices) {
    CHECK(std::abs(v.x()) <= 600 + 1e-9);
    CHECK(std::abs(v.y()) <= 400 + 1e-9);
    CHECK(std::abs(v.z()) <= 75 + 1e-9);
  }

  const render::MeshStore set = synth::make_object_set(5, 3, 19);
  REQUIRE(set.size() == 3);
  CHECK(set.count(5) == 1);
  CHECK(set.count(6) == 1);
  CHECK(set.count(7) == 1);
  for (const auto& [id, mesh] : set) {
    CHECK(mesh.object_id == id);
    CHECK_FALSE(mesh.triangles.empty());
  }
}

TEST_SUITE_END();
