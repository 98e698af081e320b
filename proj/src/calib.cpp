#include "poselabel/calib.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <tuple>

#include <nlohmann/json.hpp>

#include "poselabel/errors.hpp"
#include "poselabel/parallel.hpp"
#include "poselabel/pnp.hpp"

namespace poselabel::calib {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Number of grid steps on each side of zero. A zero range disables the axis
// (single value 0); otherwise the range must cover at least one step.
int steps_per_side(double range, double step) {
  if (range == 0) return 0;
  return int(std::floor(range / step + 1e-9));
}

struct AxisIndices {
  std::array<std::vector<int>, 6> idx;  // rx, ry, rz, tx, ty, tz
};

std::vector<TuningOffset> offsets_from_indices(const TuningGrid& grid, const AxisIndices& ax) {
  std::vector<TuningOffset> out;
  size_t total = 1;
  for (const auto& v : ax.idx) total *= v.size();
  out.reserve(total);
  for (int irx : ax.idx[0])
    for (int iry : ax.idx[1])
      for (int irz : ax.idx[2])
        for (int itx : ax.idx[3])
          for (int ity : ax.idx[4])
            for (int itz : ax.idx[5])
              out.push_back(TuningOffset{irx * grid.rotation_step, iry * grid.rotation_step,
                                         irz * grid.rotation_step, itx * grid.translation_step,
                                         ity * grid.translation_step, itz * grid.translation_step});
  return out;
}

std::vector<int> full_axis(int n) {
  std::vector<int> v;
  v.reserve(2 * n + 1);
  for (int i = -n; i <= n; ++i) v.push_back(i);
  return v;
}

// Every `stride`-th index, always including 0.
std::vector<int> decimated_axis(int n, int stride) {
  std::vector<int> v;
  for (int i = -n; i <= n; ++i)
    if (i % stride == 0) v.push_back(i);
  return v;
}

std::vector<int> window_axis(int n, int center, int radius) {
  std::vector<int> v;
  for (int i = std::max(-n, center - radius); i <= std::min(n, center + radius); ++i) v.push_back(i);
  return v;
}

AxisIndices full_indices(const TuningGrid& grid) {
  int nr = steps_per_side(grid.rotation_range, grid.rotation_step);
  int nt = steps_per_side(grid.translation_range, grid.translation_step);
  AxisIndices ax;
  for (int a = 0; a < 3; ++a) ax.idx[a] = full_axis(nr);
  for (int a = 3; a < 6; ++a) ax.idx[a] = full_axis(nt);
  return ax;
}

// Read-only description of one tuning problem, shared across workers.
struct SampleScene {
  const render::MaskImage* truth;
  // (mesh, object->camera pose at the unperturbed extrinsics)
  std::vector<std::pair<const render::TriMesh*, Pose>> objects;
};

double score_offset(const TuningOffset& offset, const std::vector<SampleScene>& scenes,
                    const CameraIntrinsics& k) {
  // Candidate camera pose is init * delta, so the object->camera pose becomes
  // invert(delta) * (object->camera at init).
  const Pose inv_delta = invert(offset.pose());
  double sum = 0;
  std::vector<render::MaskImage> parts;
  for (const auto& scene : scenes) {
    parts.clear();
    parts.reserve(scene.objects.size());
    for (const auto& [mesh, rel0] : scene.objects)
      parts.push_back(render::rasterize_mask(*mesh, compose(inv_delta, rel0), k));
    sum += iou(render::aggregate_masks(parts), *scene.truth);
  }
  return sum / double(scenes.size());
}

// Argmax with the deterministic tie-break; scores[i] belongs to offsets[i].
size_t pick_best(const std::vector<TuningOffset>& offsets, const std::vector<double>& scores) {
  size_t best = 0;
  for (size_t i = 1; i < offsets.size(); ++i) {
    if (scores[i] > scores[best] ||
        (scores[i] == scores[best] && offsets[i].tie_breaks_before(offsets[best])))
      best = i;
  }
  return best;
}

std::pair<TuningOffset, double> search(const std::vector<TuningOffset>& offsets,
                                       const std::vector<SampleScene>& scenes,
                                       const CameraIntrinsics& k, int workers) {
  std::vector<double> scores(offsets.size());
  parallel_for(offsets.size(), workers,
               [&](size_t i) { scores[i] = score_offset(offsets[i], scenes, k); });
  size_t best = pick_best(offsets, scores);
  return {offsets[best], scores[best]};
}

}  // namespace

void TuningGrid::validate() const {
  if (!(translation_step > 0) || !(rotation_step > 0))
    throw Error(Errc::invalid_argument, "tuning grid steps must be positive");
  if (translation_range < 0 || rotation_range < 0)
    throw Error(Errc::invalid_argument, "tuning grid ranges must be non-negative");
  if (translation_range != 0 && translation_range < translation_step)
    throw Error(Errc::invalid_argument, "tuning translation range smaller than one step");
  if (rotation_range != 0 && rotation_range < rotation_step)
    throw Error(Errc::invalid_argument, "tuning rotation range smaller than one step");
  if (candidate_cap <= 0) throw Error(Errc::invalid_argument, "tuning candidate cap must be positive");
  long count = candidate_count();
  if (count > candidate_cap)
    throw Error(Errc::value_overflow, "tuning grid has " + std::to_string(count) +
                                          " candidates, cap is " + std::to_string(candidate_cap));
}

long TuningGrid::candidate_count() const {
  double nr = 2.0 * steps_per_side(rotation_range, rotation_step) + 1;
  double nt = 2.0 * steps_per_side(translation_range, translation_step) + 1;
  double total = nr * nr * nr * nt * nt * nt;
  if (total > double(std::numeric_limits<long>::max() / 2))
    return std::numeric_limits<long>::max();
  return long(total);
}

std::vector<TuningOffset> enumerate_offsets(const TuningGrid& grid) {
  return offsets_from_indices(grid, full_indices(grid));
}

Pose TuningOffset::pose() const {
  Rotation r = Rotation::about_x(rx_deg * kDegToRad) * Rotation::about_y(ry_deg * kDegToRad) *
               Rotation::about_z(rz_deg * kDegToRad);
  return Pose{r, Vec3(tx, ty, tz)};
}

double TuningOffset::rotation_norm() const { return pose().rotation.angle(); }

double TuningOffset::translation_norm() const { return std::sqrt(tx * tx + ty * ty + tz * tz); }

bool TuningOffset::tie_breaks_before(const TuningOffset& o) const {
  return std::make_tuple(rotation_norm(), translation_norm(), rx_deg, ry_deg, rz_deg, tx, ty, tz) <
         std::make_tuple(o.rotation_norm(), o.translation_norm(), o.rx_deg, o.ry_deg, o.rz_deg,
                         o.tx, o.ty, o.tz);
}

CameraExtrinsics localize_camera(const board::BoardSpec& spec,
                                 const std::vector<board::BoardObservation>& observations,
                                 const CameraIntrinsics& k) {
  pnp::PnPSolution solution = pnp::solve_pnp(board::build_correspondences(spec, observations, k));
  CameraExtrinsics out;
  out.camera_id = observations.front().camera_id;
  out.pose_mc_cam = invert(solution.pose);
  out.rms_reprojection_error = solution.rms_reprojection_error;
  out.tuned = false;
  return out;
}

double iou(const render::MaskImage& a, const render::MaskImage& b) {
  if (!a.same_dims(b))
    throw Error(Errc::dimension_mismatch, "iou over masks of different dimensions");
  long inter = 0, uni = 0;
  for (size_t i = 0; i < a.bits.size(); ++i) {
    bool pa = a.bits[i] != 0, pb = b.bits[i] != 0;
    inter += pa && pb;
    uni += pa || pb;
  }
  if (uni == 0) return 0.0;
  return double(inter) / double(uni);
}

CameraExtrinsics tune_camera(const CameraExtrinsics& init, const TuningGrid& grid,
                             const std::vector<TuningSample>& samples,
                             const render::MeshStore& meshes, const CameraIntrinsics& k,
                             double iou_threshold, int workers, double* best_score_out) {
  grid.validate();
  if (samples.empty())
    throw Error(Errc::invalid_argument, "camera tuning requires at least one sample");

  const Pose cam_from_mc = invert(init.pose_mc_cam);
  std::vector<SampleScene> scenes;
  scenes.reserve(samples.size());
  for (const auto& sample : samples) {
    if (sample.ground_truth_mask.width != k.width || sample.ground_truth_mask.height != k.height)
      throw Error(Errc::dimension_mismatch,
                  "ground-truth mask dimensions differ from camera image dimensions");
    SampleScene scene;
    scene.truth = &sample.ground_truth_mask;
    for (const auto& [object_id, pose_mc_obj] : sample.objects) {
      auto it = meshes.find(object_id);
      if (it == meshes.end())
        throw Error(Errc::missing_mesh, "no mesh for object " + std::to_string(object_id));
      scene.objects.emplace_back(&it->second, compose(cam_from_mc, pose_mc_obj));
    }
    scenes.push_back(std::move(scene));
  }

  TuningOffset best_offset;
  double best_score;
  if (!grid.coarse_to_fine) {
    std::tie(best_offset, best_score) = search(enumerate_offsets(grid), scenes, k, workers);
  } else {
    // Two-pass heuristic: evaluate every 4th lattice point per axis, then the
    // full-resolution lattice within 2 steps of that winner. The result is
    // still a lattice point, but the search is no longer exhaustive.
    constexpr int kStride = 4;
    int nr = steps_per_side(grid.rotation_range, grid.rotation_step);
    int nt = steps_per_side(grid.translation_range, grid.translation_step);
    AxisIndices coarse;
    for (int a = 0; a < 3; ++a) coarse.idx[a] = decimated_axis(nr, kStride);
    for (int a = 3; a < 6; ++a) coarse.idx[a] = decimated_axis(nt, kStride);
    auto [center, coarse_score] =
        search(offsets_from_indices(grid, coarse), scenes, k, workers);
    (void)coarse_score;

    auto step_index = [](double value, double step) { return int(std::lround(value / step)); };
    AxisIndices fine;
    fine.idx[0] = window_axis(nr, step_index(center.rx_deg, grid.rotation_step), kStride / 2);
    fine.idx[1] = window_axis(nr, step_index(center.ry_deg, grid.rotation_step), kStride / 2);
    fine.idx[2] = window_axis(nr, step_index(center.rz_deg, grid.rotation_step), kStride / 2);
    fine.idx[3] = window_axis(nt, step_index(center.tx, grid.translation_step), kStride / 2);
    fine.idx[4] = window_axis(nt, step_index(center.ty, grid.translation_step), kStride / 2);
    fine.idx[5] = window_axis(nt, step_index(center.tz, grid.translation_step), kStride / 2);
    std::tie(best_offset, best_score) = search(offsets_from_indices(grid, fine), scenes, k, workers);
  }

  if (best_score_out) *best_score_out = best_score;
  if (best_score < iou_threshold) return init;

  CameraExtrinsics out = init;
  out.pose_mc_cam = compose(init.pose_mc_cam, best_offset.pose());
  out.tuned = true;
  out.tuning_score = best_score;
  return out;
}

void save_extrinsics(const std::string& path,
                     const std::map<std::string, CameraExtrinsics>& extrinsics) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [camera_id, e] : extrinsics) {
    nlohmann::json entry;
    const Vec3& t = e.pose_mc_cam.translation;
    Eigen::Vector4d q = e.pose_mc_cam.rotation.quaternion_xyzw();
    entry["t"] = {t.x(), t.y(), t.z()};
    entry["q"] = {q[0], q[1], q[2], q[3]};
    entry["rms_px"] = e.rms_reprojection_error;
    entry["tuned"] = e.tuned;
    if (e.tuning_score) entry["tuning_score"] = *e.tuning_score;
    doc[camera_id] = std::move(entry);
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw Error(Errc::io, "failed writing " + path);
}

std::map<std::string, CameraExtrinsics> load_extrinsics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, path + ": " + e.what());
  }
  std::map<std::string, CameraExtrinsics> out;
  try {
    if (!doc.is_object()) throw Error(Errc::schema, path + ": expected a JSON object");
    for (const auto& [camera_id, entry] : doc.items()) {
      CameraExtrinsics e;
      e.camera_id = camera_id;
      const auto& t = entry.at("t");
      const auto& q = entry.at("q");
      if (t.size() != 3 || q.size() != 4)
        throw Error(Errc::schema, path + ": t must have 3 entries and q 4");
      e.pose_mc_cam = Pose::from_quaternion(
          Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()),
          q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
          q.at(3).get<double>());
      e.rms_reprojection_error = entry.at("rms_px").get<double>();
      e.tuned = entry.at("tuned").get<bool>();
      if (entry.contains("tuning_score")) e.tuning_score = entry["tuning_score"].get<double>();
      if (e.tuned && !e.tuning_score)
        throw Error(Errc::schema, path + ": tuned camera " + camera_id + " lacks tuning_score");
      out.emplace(camera_id, std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::schema, path + ": " + e.what());
  }
  return out;
}

}  // namespace poselabel::calib
