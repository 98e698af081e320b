#include "poselabel/annotate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "poselabel/errors.hpp"
#include "poselabel/parallel.hpp"

namespace poselabel::annotate {

namespace {

// strtod-based field parser that rejects trailing garbage (" 1.5x" etc).
double parse_field(const std::string& field, const std::string& path, size_t line_no) {
  size_t pos = 0;
  double value;
  try {
    value = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw Error(Errc::parse, path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
  }
  while (pos < field.size() && std::isspace((unsigned char)field[pos])) ++pos;
  if (pos != field.size())
    throw Error(Errc::parse, path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const char* kCsvHeader = "timestamp_s,object_id,tx_mm,ty_mm,tz_mm,qx,qy,qz,qw";

}  // namespace

Pose relative_pose(const calib::CameraExtrinsics& cam, const ObjectState& obj) {
  return compose(invert(cam.pose_mc_cam), obj.pose_mc_obj);
}

std::optional<Annotation> annotate_object(const calib::CameraExtrinsics& cam,
                                          const CameraIntrinsics& k, const ObjectState& obj,
                                          const render::TriMesh& mesh, long min_visible_pixels) {
  Annotation a;
  a.object_id = obj.object_id;
  a.relative_pose = relative_pose(cam, obj);
  a.mask = render::rasterize_mask(mesh, a.relative_pose, k);
  a.visible_pixel_count = a.mask.count();
  if (a.visible_pixel_count < min_visible_pixels) return std::nullopt;
  a.bbox = *fit_bbox(a.mask);
  return a;
}

std::optional<BBox> fit_bbox(const render::MaskImage& mask) {
  int min_x = mask.width, min_y = mask.height, max_x = -1, max_y = -1;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) return std::nullopt;
  return BBox{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
}

imgio::Gray16 mock_depth(const render::MaskImage& aggregated, double fixed_distance_mm,
                         double depth_scale) {
  if (!(fixed_distance_mm > 0))
    throw Error(Errc::invalid_argument, "mock depth distance must be positive");
  if (!(depth_scale > 0)) throw Error(Errc::invalid_argument, "depth scale must be positive");
  double quantized = std::round(fixed_distance_mm / depth_scale);
  if (quantized > 65535.0)
    throw Error(Errc::value_overflow, "mock depth value " + std::to_string(long(quantized)) +
                                          " exceeds the 16-bit range");
  uint16_t value = uint16_t(quantized);
  imgio::Gray16 depth;
  depth.width = aggregated.width;
  depth.height = aggregated.height;
  depth.pixels.resize(aggregated.bits.size(), 0);
  for (size_t i = 0; i < aggregated.bits.size(); ++i)
    if (aggregated.bits[i]) depth.pixels[i] = value;
  return depth;
}

SceneRecord annotate_scene(const Rig& rig, const render::MeshStore& meshes,
                           const SceneInput& input, const AnnotateOptions& options) {
  std::vector<std::string> camera_ids = input.camera_ids;
  std::sort(camera_ids.begin(), camera_ids.end());
  if (std::adjacent_find(camera_ids.begin(), camera_ids.end()) != camera_ids.end())
    throw Error(Errc::invalid_argument,
                "scene " + std::to_string(input.scene_id) + " lists a camera twice");
  for (const auto& id : camera_ids)
    if (!rig.count(id))
      throw Error(Errc::missing_extrinsics, "camera " + id + " is not in the rig");

  std::vector<ObjectState> objects = input.objects;
  std::sort(objects.begin(), objects.end(),
            [](const ObjectState& a, const ObjectState& b) { return a.object_id < b.object_id; });
  for (const auto& obj : objects)
    if (!meshes.count(obj.object_id))
      throw Error(Errc::missing_mesh, "no mesh for object " + std::to_string(obj.object_id));

  // One task per (camera, object); results land in fixed slots so assembly
  // below does not depend on completion order.
  size_t n_views = camera_ids.size(), n_objects = objects.size();
  std::vector<std::optional<Annotation>> results(n_views * n_objects);
  parallel_for(results.size(), options.workers, [&](size_t task) {
    size_t v = task / n_objects, o = task % n_objects;
    const Camera& cam = rig.at(camera_ids[v]);
    results[task] = annotate_object(cam.extrinsics, cam.intrinsics, objects[o],
                                    meshes.at(objects[o].object_id), options.min_visible_pixels);
  });

  SceneRecord record;
  record.scene_id = input.scene_id;
  record.scenario = input.scenario;
  record.depth_scale = options.depth_scale;
  record.objects = std::move(objects);
  record.views.reserve(n_views);
  for (size_t v = 0; v < n_views; ++v) {
    SceneRecord::View view;
    view.image_id = int(v);
    view.camera_id = camera_ids[v];
    const CameraIntrinsics& k = rig.at(camera_ids[v]).intrinsics;
    view.intrinsics = k;
    std::vector<render::MaskImage> parts;
    for (size_t o = 0; o < n_objects; ++o) {
      if (auto& a = results[v * n_objects + o]) {
        parts.push_back(a->mask);
        view.annotations.push_back(std::move(*a));
      }
    }
    view.aggregated_mask =
        parts.empty() ? render::MaskImage(k.width, k.height) : render::aggregate_masks(parts);
    view.mock_depth = mock_depth(view.aggregated_mask, options.mock_depth_mm, options.depth_scale);
    record.views.push_back(std::move(view));
  }
  return record;
}

MocapLog MocapLog::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::parse, path + ": empty file");
  if (trim(line) != kCsvHeader)
    throw Error(Errc::schema,
                path + ": expected header '" + std::string(kCsvHeader) + "', got '" + trim(line) + "'");

  MocapLog log;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 9)
      throw Error(Errc::parse, path + ":" + std::to_string(line_no) + ": expected 9 fields, got " +
                                   std::to_string(fields.size()));
    double t = parse_field(fields[0], path, line_no);
    double id_raw = parse_field(fields[1], path, line_no);
    if (id_raw != std::floor(id_raw) || id_raw < 0)
      throw Error(Errc::parse,
                  path + ":" + std::to_string(line_no) + ": object_id must be a non-negative integer");
    double v[7];
    for (int i = 0; i < 7; ++i) v[i] = parse_field(fields[i + 2], path, line_no);
    Pose pose = Pose::from_quaternion(Vec3(v[0], v[1], v[2]), v[3], v[4], v[5], v[6]);
    log.tracks[int(id_raw)].emplace_back(t, pose);
  }
  for (auto& [id, track] : log.tracks)
    std::stable_sort(track.begin(), track.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
  return log;
}

void MocapLog::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open " + path + " for writing");
  out << kCsvHeader << "\n";
  char buf[512];
  for (const auto& [id, track] : tracks) {
    for (const auto& [t, pose] : track) {
      Eigen::Vector4d q = pose.rotation.quaternion_xyzw();
      // 17 significant digits round-trip doubles exactly through the file.
      std::snprintf(buf, sizeof(buf),
                    "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t, id,
                    pose.translation.x(), pose.translation.y(), pose.translation.z(), q[0], q[1],
                    q[2], q[3]);
      out << buf;
    }
  }
  if (!out) throw Error(Errc::io, "failed writing " + path);
}

std::optional<ObjectState> MocapLog::sample(int object_id, double timestamp,
                                            double window_s) const {
  auto track_it = tracks.find(object_id);
  if (track_it == tracks.end() || track_it->second.empty()) return std::nullopt;
  const auto& track = track_it->second;

  auto after = std::lower_bound(
      track.begin(), track.end(), timestamp,
      [](const std::pair<double, Pose>& entry, double t) { return entry.first < t; });
  const std::pair<double, Pose>* best = nullptr;
  if (after != track.begin()) best = &*std::prev(after);
  if (after != track.end()) {
    // Strict < keeps the earlier sample on an exact tie.
    if (!best || std::abs(after->first - timestamp) < std::abs(best->first - timestamp))
      best = &*after;
  }
  if (!best || std::abs(best->first - timestamp) > window_s) return std::nullopt;
  return ObjectState{object_id, best->second, best->first};
}

std::vector<ObjectState> MocapLog::sample_all(double timestamp, double window_s) const {
  std::vector<ObjectState> out;
  for (const auto& [id, track] : tracks)
    if (auto state = sample(id, timestamp, window_s)) out.push_back(*state);
  return out;
}

std::vector<int> MocapLog::object_ids() const {
  std::vector<int> ids;
  ids.reserve(tracks.size());
  for (const auto& [id, track] : tracks) ids.push_back(id);
  return ids;
}

}  // namespace poselabel::annotate
