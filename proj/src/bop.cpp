#include "poselabel/bop.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "poselabel/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace poselabel::bop {

namespace {

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, path.string() + ": " + e.what());
  }
}

void dump_json(const json& doc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw Error(Errc::io, "failed writing " + path.string());
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
}

imgio::Gray8 mask_to_gray(const render::MaskImage& mask) {
  imgio::Gray8 img;
  img.width = mask.width;
  img.height = mask.height;
  img.pixels.resize(mask.bits.size());
  for (size_t i = 0; i < mask.bits.size(); ++i) img.pixels[i] = mask.bits[i] ? 255 : 0;
  return img;
}

render::MaskImage gray_to_mask(const imgio::Gray8& img) {
  render::MaskImage mask(img.width, img.height);
  for (size_t i = 0; i < img.pixels.size(); ++i) mask.bits[i] = img.pixels[i] != 0;
  return mask;
}

json k_matrix_json(const CameraIntrinsics& k) {
  return json::array({k.fx, 0.0, k.cx, 0.0, k.fy, k.cy, 0.0, 0.0, 1.0});
}

json rotation_json(const Rotation& r) {
  const Mat3& m = r.matrix();
  json a = json::array();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a.push_back(m(i, j));
  return a;
}

json pose_entry_json(const Pose& pose, int object_id) {
  return json{{"obj_id", object_id},
              {"cam_R_m2c", rotation_json(pose.rotation)},
              {"cam_t_m2c", {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

/// Image-id keys in the scene JSONs follow BOP: unpadded decimal strings.
std::string image_key(int image_id) { return std::to_string(image_id); }

int parse_image_key(const std::string& key, const fs::path& file) {
  size_t pos = 0;
  int id;
  try {
    id = std::stoi(key, &pos);
  } catch (const std::exception&) {
    throw Error(Errc::schema, file.string() + ": non-numeric image key '" + key + "'");
  }
  if (pos != key.size() || id < 0)
    throw Error(Errc::schema, file.string() + ": non-numeric image key '" + key + "'");
  return id;
}

std::vector<int> sorted_image_ids(const json& doc, const fs::path& file) {
  std::vector<int> ids;
  for (const auto& [key, value] : doc.items()) ids.push_back(parse_image_key(key, file));
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string group_digits(long n) {
  std::string raw = std::to_string(n);
  std::string out;
  int count = 0;
  for (auto it = raw.rbegin(); it != raw.rend(); ++it) {
    if (count && count % 3 == 0 && std::isdigit((unsigned char)*it)) out.push_back(',');
    out.push_back(*it);
    ++count;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

std::string DatasetLayout::padded(int id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", id);
  return buf;
}

std::string DatasetLayout::scene_dir(int scene_id) const {
  return (fs::path(root) / padded(scene_id)).string();
}

std::string DatasetLayout::mask_path(int scene_id, int image_id, int annotation_index,
                                     bool visib) const {
  return (fs::path(scene_dir(scene_id)) / (visib ? "mask_visib" : "mask") /
          (padded(image_id) + "_" + padded(annotation_index) + ".png"))
      .string();
}

std::string DatasetLayout::depth_path(int scene_id, int image_id) const {
  return (fs::path(scene_dir(scene_id)) / "depth" / (padded(image_id) + ".png")).string();
}

std::string DatasetLayout::rgb_path(int scene_id, int image_id) const {
  return (fs::path(scene_dir(scene_id)) / "rgb" / (padded(image_id) + ".png")).string();
}

std::vector<int> DatasetLayout::scene_ids() const {
  if (!fs::is_directory(root)) throw Error(Errc::io, "dataset root " + root + " is not a directory");
  std::vector<int> ids;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() == 6 && std::all_of(name.begin(), name.end(),
                                        [](char c) { return std::isdigit((unsigned char)c); }))
      ids.push_back(std::stoi(name));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

void write_scene(const annotate::SceneRecord& record, const DatasetLayout& layout) {
  fs::path dir = layout.scene_dir(record.scene_id);
  for (const char* sub : {"rgb", "mask", "mask_visib", "depth"}) make_dir(dir / sub);

  json cam = json::object(), gt = json::object(), info = json::object();
  json images = json::object();
  for (const auto& view : record.views) {
    std::string key = image_key(view.image_id);
    cam[key] = json{{"cam_K", k_matrix_json(view.intrinsics)}, {"depth_scale", record.depth_scale}};

    json gt_list = json::array(), info_list = json::array();
    for (size_t i = 0; i < view.annotations.size(); ++i) {
      const annotate::Annotation& a = view.annotations[i];
      gt_list.push_back(pose_entry_json(a.relative_pose, a.object_id));
      info_list.push_back(json{{"bbox_obj", {a.bbox.x, a.bbox.y, a.bbox.w, a.bbox.h}},
                               {"px_count_visib", a.visible_pixel_count}});
      imgio::Gray8 mask = mask_to_gray(a.mask);
      imgio::write_png(layout.mask_path(record.scene_id, view.image_id, int(i), false), mask);
      imgio::write_png(layout.mask_path(record.scene_id, view.image_id, int(i), true), mask);
    }
    gt[key] = std::move(gt_list);
    info[key] = std::move(info_list);

    imgio::write_png(layout.depth_path(record.scene_id, view.image_id), view.mock_depth);
    if (view.rgb) imgio::write_png(layout.rgb_path(record.scene_id, view.image_id), *view.rgb);

    images[key] = json{{"camera_id", view.camera_id},
                       {"width", view.intrinsics.width},
                       {"height", view.intrinsics.height},
                       {"k1", view.intrinsics.k1},
                       {"k2", view.intrinsics.k2}};
  }

  json objects = json::array();
  for (const auto& obj : record.objects) {
    // Row-major matrix like cam_R_m2c: doubles survive the JSON round trip
    // bit-exactly, which a quaternion extraction would not.
    objects.push_back(json{
        {"object_id", obj.object_id},
        {"t", {obj.pose_mc_obj.translation.x(), obj.pose_mc_obj.translation.y(),
               obj.pose_mc_obj.translation.z()}},
        {"R", rotation_json(obj.pose_mc_obj.rotation)},
        {"timestamp", obj.timestamp}});
  }

  dump_json(cam, dir / "scene_camera.json");
  dump_json(gt, dir / "scene_gt.json");
  dump_json(info, dir / "scene_gt_info.json");
  dump_json(json{{"scenario", record.scenario}, {"images", images}, {"objects", objects}},
            dir / "cameras.json");
}

annotate::SceneRecord read_scene(const DatasetLayout& layout, int scene_id) {
  fs::path dir = layout.scene_dir(scene_id);
  json cam = load_json(dir / "scene_camera.json");
  json gt = load_json(dir / "scene_gt.json");
  json info = load_json(dir / "scene_gt_info.json");
  json sidecar = load_json(dir / "cameras.json");

  annotate::SceneRecord record;
  record.scene_id = scene_id;
  try {
    record.scenario = sidecar.value("scenario", "");

    for (int image_id : sorted_image_ids(cam, dir / "scene_camera.json")) {
      std::string key = image_key(image_id);
      annotate::SceneRecord::View view;
      view.image_id = image_id;

      const json& meta = sidecar.at("images").at(key);
      view.camera_id = meta.at("camera_id").get<std::string>();
      const json& cam_entry = cam.at(key);
      const json& k_flat = cam_entry.at("cam_K");
      if (k_flat.size() != 9)
        throw Error(Errc::schema, (dir / "scene_camera.json").string() + ": cam_K of image " +
                                      key + " must have 9 entries");
      view.intrinsics = CameraIntrinsics::make(
          k_flat.at(0).get<double>(), k_flat.at(4).get<double>(), k_flat.at(2).get<double>(),
          k_flat.at(5).get<double>(), meta.at("width").get<int>(), meta.at("height").get<int>(),
          meta.value("k1", 0.0), meta.value("k2", 0.0));
      record.depth_scale = cam_entry.at("depth_scale").get<double>();

      const json& gt_list = gt.at(key);
      const json& info_list = info.at(key);
      if (gt_list.size() != info_list.size())
        throw Error(Errc::schema, (dir / "scene_gt_info.json").string() + ": image " + key +
                                      " has " + std::to_string(info_list.size()) +
                                      " entries, scene_gt.json has " +
                                      std::to_string(gt_list.size()));
      std::vector<render::MaskImage> parts;
      for (size_t i = 0; i < gt_list.size(); ++i) {
        annotate::Annotation a;
        const json& g = gt_list.at(i);
        a.object_id = g.at("obj_id").get<int>();
        const json& r_flat = g.at("cam_R_m2c");
        const json& t_flat = g.at("cam_t_m2c");
        if (r_flat.size() != 9 || t_flat.size() != 3)
          throw Error(Errc::schema, (dir / "scene_gt.json").string() + ": image " + key +
                                        ": cam_R_m2c needs 9 entries and cam_t_m2c 3");
        Mat3 m;
        for (int row = 0; row < 3; ++row)
          for (int col = 0; col < 3; ++col) m(row, col) = r_flat.at(row * 3 + col).get<double>();
        a.relative_pose = Pose{Rotation::from_matrix(m),
                               Vec3(t_flat.at(0).get<double>(), t_flat.at(1).get<double>(),
                                    t_flat.at(2).get<double>())};
        const json& gi = info_list.at(i);
        const json& box = gi.at("bbox_obj");
        if (box.size() != 4)
          throw Error(Errc::schema,
                      (dir / "scene_gt_info.json").string() + ": bbox_obj needs 4 entries");
        a.bbox = annotate::BBox{box.at(0).get<int>(), box.at(1).get<int>(), box.at(2).get<int>(),
                                box.at(3).get<int>()};
        a.visible_pixel_count = gi.at("px_count_visib").get<long>();
        a.mask = gray_to_mask(imgio::read_png_gray8(layout.mask_path(scene_id, image_id, int(i), false)));
        parts.push_back(a.mask);
        view.annotations.push_back(std::move(a));
      }
      view.aggregated_mask = parts.empty()
                                 ? render::MaskImage(view.intrinsics.width, view.intrinsics.height)
                                 : render::aggregate_masks(parts);
      view.mock_depth = imgio::read_png_gray16(layout.depth_path(scene_id, image_id));
      if (fs::exists(layout.rgb_path(scene_id, image_id)))
        view.rgb = imgio::read_png_rgb8(layout.rgb_path(scene_id, image_id));
      record.views.push_back(std::move(view));
    }

    for (const json& o : sidecar.value("objects", json::array())) {
      annotate::ObjectState state;
      state.object_id = o.at("object_id").get<int>();
      const json& t = o.at("t");
      const json& r_flat = o.at("R");
      if (t.size() != 3 || r_flat.size() != 9)
        throw Error(Errc::schema, (dir / "cameras.json").string() + ": objects entries need t[3] and R[9]");
      Mat3 m;
      for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) m(row, col) = r_flat.at(row * 3 + col).get<double>();
      state.pose_mc_obj =
          Pose{Rotation::from_matrix(m),
               Vec3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>())};
      state.timestamp = o.value("timestamp", 0.0);
      record.objects.push_back(std::move(state));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::schema, dir.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::invalid_argument)  // e.g. a non-orthonormal cam_R_m2c
      throw Error(Errc::schema, dir.string() + ": " + e.what());
    throw;
  }
  return record;
}

std::vector<Violation> validate(const DatasetLayout& layout) {
  std::vector<Violation> violations;
  auto flag = [&](const std::string& where, const std::string& message) {
    violations.push_back(Violation{where, message});
  };
  const std::regex mask_name_re("([0-9]{6})_([0-9]{6})\\.png");

  for (int scene_id : layout.scene_ids()) {
    fs::path dir = layout.scene_dir(scene_id);
    std::string scene_tag = DatasetLayout::padded(scene_id);
    json cam, gt, info, sidecar;
    try {
      cam = load_json(dir / "scene_camera.json");
      gt = load_json(dir / "scene_gt.json");
      info = load_json(dir / "scene_gt_info.json");
      sidecar = load_json(dir / "cameras.json");
    } catch (const Error& e) {
      flag(scene_tag, e.what());
      continue;
    }

    // The three per-image documents and the sidecar must cover the same ids.
    for (const auto& [key, value] : cam.items()) {
      if (!gt.contains(key)) flag(scene_tag + "/scene_gt.json", "missing entry for image " + key);
      if (!info.contains(key))
        flag(scene_tag + "/scene_gt_info.json", "missing entry for image " + key);
      if (!sidecar.contains("images") || !sidecar["images"].contains(key))
        flag(scene_tag + "/cameras.json", "missing entry for image " + key);
    }
    for (const auto& [key, value] : gt.items())
      if (!cam.contains(key))
        flag(scene_tag + "/scene_camera.json", "missing entry for image " + key);
    for (const auto& [key, value] : info.items())
      if (!cam.contains(key))
        flag(scene_tag + "/scene_camera.json", "missing entry for image " + key);

    // Per-image checks. Unreadable values are flagged and skipped.
    std::set<std::string> expected_masks;
    for (const auto& [key, cam_entry] : cam.items()) {
      int image_id;
      try {
        image_id = parse_image_key(key, dir / "scene_camera.json");
      } catch (const Error& e) {
        flag(scene_tag + "/scene_camera.json", e.what());
        continue;
      }
      int width = 0, height = 0;
      try {
        const json& meta = sidecar.at("images").at(key);
        width = meta.at("width").get<int>();
        height = meta.at("height").get<int>();
      } catch (const json::exception&) {
        // Missing sidecar entry was already flagged above.
      }

      if (!gt.contains(key) || !info.contains(key)) continue;
      const json& gt_list = gt[key];
      const json& info_list = info[key];
      if (gt_list.size() != info_list.size()) {
        flag(scene_tag + ":" + key, "scene_gt has " + std::to_string(gt_list.size()) +
                                        " annotations, scene_gt_info has " +
                                        std::to_string(info_list.size()));
      }

      for (size_t i = 0; i < gt_list.size(); ++i) {
        std::string where = scene_tag + ":" + key + ":" + std::to_string(i);
        try {
          const json& r_flat = gt_list.at(i).at("cam_R_m2c");
          if (r_flat.size() != 9) {
            flag(where, "cam_R_m2c must have 9 entries");
          } else {
            Mat3 m;
            for (int row = 0; row < 3; ++row)
              for (int col = 0; col < 3; ++col)
                m(row, col) = r_flat.at(row * 3 + col).get<double>();
            double drift = Rotation::orthonormality_drift(m);
            if (!(drift <= 1e-6))
              flag(where, "cam_R_m2c is not orthonormal (drift " + std::to_string(drift) + ")");
          }
        } catch (const json::exception& e) {
          flag(where, std::string("bad scene_gt entry: ") + e.what());
        }

        long px_count = -1;
        if (i < info_list.size()) {
          try {
            const json& box = info_list.at(i).at("bbox_obj");
            px_count = info_list.at(i).at("px_count_visib").get<long>();
            int x = box.at(0).get<int>(), y = box.at(1).get<int>();
            int w = box.at(2).get<int>(), h = box.at(3).get<int>();
            if (width > 0 && (x < 0 || y < 0 || w < 1 || h < 1 || x + w > width || y + h > height))
              flag(where, "bbox_obj [" + std::to_string(x) + "," + std::to_string(y) + "," +
                              std::to_string(w) + "," + std::to_string(h) +
                              "] extends outside the " + std::to_string(width) + "x" +
                              std::to_string(height) + " image");
          } catch (const json::exception& e) {
            flag(where, std::string("bad scene_gt_info entry: ") + e.what());
          }
        }

        for (bool visib : {false, true}) {
          std::string mask_path = layout.mask_path(scene_id, image_id, int(i), visib);
          std::string mask_name = fs::path(mask_path).filename().string();
          if (!visib) expected_masks.insert(mask_name);
          if (!fs::exists(mask_path)) {
            flag(where, std::string(visib ? "mask_visib/" : "mask/") + mask_name + " is missing");
            continue;
          }
          try {
            imgio::Gray8 mask = imgio::read_png_gray8(mask_path);
            if (width > 0 && (mask.width != width || mask.height != height))
              flag(where, mask_name + " is " + std::to_string(mask.width) + "x" +
                              std::to_string(mask.height) + ", camera is " +
                              std::to_string(width) + "x" + std::to_string(height));
            else if (!visib && px_count >= 0) {
              long actual = 0;
              for (uint8_t p : mask.pixels) actual += p != 0;
              if (actual != px_count)
                flag(where, "px_count_visib is " + std::to_string(px_count) + ", mask has " +
                                std::to_string(actual) + " set pixels");
            }
          } catch (const Error& e) {
            flag(where, e.what());
          }
        }
      }

      std::string depth_path = layout.depth_path(scene_id, image_id);
      if (!fs::exists(depth_path)) {
        flag(scene_tag + ":" + key, "depth/" + fs::path(depth_path).filename().string() + " is missing");
      } else {
        try {
          imgio::Gray16 depth = imgio::read_png_gray16(depth_path);
          if (width > 0 && (depth.width != width || depth.height != height))
            flag(scene_tag + ":" + key, "depth image is " + std::to_string(depth.width) + "x" +
                                            std::to_string(depth.height) + ", camera is " +
                                            std::to_string(width) + "x" + std::to_string(height));
        } catch (const Error& e) {
          flag(scene_tag + ":" + key, e.what());
        }
      }
    }

    // Stray or misnamed files in mask/ break the naming invariant.
    for (const char* sub : {"mask", "mask_visib"}) {
      fs::path mask_dir = dir / sub;
      if (!fs::is_directory(mask_dir)) continue;
      for (const auto& entry : fs::directory_iterator(mask_dir)) {
        std::string name = entry.path().filename().string();
        if (!std::regex_match(name, mask_name_re))
          flag(scene_tag + "/" + sub, name + " does not match <image>_<annotation>.png");
        else if (!expected_masks.count(name))
          flag(scene_tag + "/" + sub, name + " has no scene_gt entry");
      }
    }
  }
  return violations;
}

DatasetStats& DatasetStats::operator+=(const DatasetStats& o) {
  for (const auto& [cls, n] : o.instances_per_class) instances_per_class[cls] += n;
  total_instances += o.total_instances;
  total_frames += o.total_frames;
  for (const auto& [name, counts] : o.per_scenario) {
    per_scenario[name].instances += counts.instances;
    per_scenario[name].frames += counts.frames;
  }
  annotation_time_s += o.annotation_time_s;
  return *this;
}

DatasetStats stats(const DatasetLayout& layout) {
  DatasetStats s;
  for (int scene_id : layout.scene_ids()) {
    fs::path dir = layout.scene_dir(scene_id);
    json cam = load_json(dir / "scene_camera.json");
    json gt = load_json(dir / "scene_gt.json");
    std::string scenario = "default";
    if (fs::exists(dir / "cameras.json"))
      scenario = load_json(dir / "cameras.json").value("scenario", "default");
    if (scenario.empty()) scenario = "default";

    long frames = long(cam.size());
    long instances = 0;
    try {
      for (const auto& [key, gt_list] : gt.items()) {
        for (const json& entry : gt_list) {
          ++instances;
          s.instances_per_class[entry.at("obj_id").get<int>()] += 1;
        }
      }
    } catch (const json::exception& e) {
      throw Error(Errc::schema, (dir / "scene_gt.json").string() + ": " + e.what());
    }
    s.total_frames += frames;
    s.total_instances += instances;
    s.per_scenario[scenario].frames += frames;
    s.per_scenario[scenario].instances += instances;
  }
  s.annotation_time_s = read_annotation_time(layout);
  return s;
}

std::string format_stats(const DatasetStats& s) {
  size_t name_width = 8;
  for (const auto& [name, counts] : s.per_scenario) name_width = std::max(name_width, name.size());
  std::ostringstream out;
  out << std::left << std::setw(int(name_width) + 2) << "Scenario" << std::right << std::setw(12)
      << "Frames" << std::setw(12) << "Instances" << "\n";
  for (const auto& [name, counts] : s.per_scenario)
    out << std::left << std::setw(int(name_width) + 2) << name << std::right << std::setw(12)
        << group_digits(counts.frames) << std::setw(12) << group_digits(counts.instances) << "\n";
  out << std::left << std::setw(int(name_width) + 2) << "total" << std::right << std::setw(12)
      << group_digits(s.total_frames) << std::setw(12) << group_digits(s.total_instances) << "\n";

  if (!s.instances_per_class.empty()) {
    out << "\nInstances per class:\n";
    for (const auto& [cls, n] : s.instances_per_class)
      out << "  " << cls << ": " << group_digits(n) << "\n";
  }
  if (s.annotation_time_s > 0) {
    out << "\nAnnotation time: " << std::fixed << std::setprecision(1)
        << s.annotation_time_s / 60.0 << " min (" << std::setprecision(3) << s.annotation_time_s
        << " s)\n";
  }
  return out.str();
}

void write_dataset_info(const DatasetLayout& layout, double annotation_time_s) {
  make_dir(layout.root);
  dump_json(json{{"annotation_time_s", annotation_time_s}}, fs::path(layout.root) / "dataset_info.json");
}

double read_annotation_time(const DatasetLayout& layout) {
  fs::path path = fs::path(layout.root) / "dataset_info.json";
  if (!fs::exists(path)) return 0;
  return load_json(path).value("annotation_time_s", 0.0);
}

}  // namespace poselabel::bop
