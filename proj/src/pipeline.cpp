#include "poselabel/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "poselabel/bop.hpp"
#include "poselabel/errors.hpp"
#include "poselabel/log.hpp"
#include "poselabel/parallel.hpp"
#include "poselabel/raster.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace poselabel::pipeline {

namespace {

void require_path(const std::string& value, const std::string& key) {
  if (value.empty()) throw Error(Errc::schema, "config is missing paths." + key);
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::parse, path + ": " + e.what());
  }
}

void dump_json(const json& doc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
  if (!out) throw Error(Errc::io, "failed writing " + path);
}

/// Refuses to clobber an existing file/non-empty directory unless overwrite
/// is set, in which case the target is removed.
void claim_output(const std::string& path, bool overwrite, const std::string& what) {
  if (path.empty()) return;
  std::error_code ec;
  bool occupied = fs::is_directory(path, ec) ? !fs::is_empty(path, ec) : fs::exists(path, ec);
  if (!occupied) return;
  if (!overwrite)
    throw Error(Errc::invalid_argument, what + " " + path + " already exists; pass --overwrite");
  fs::remove_all(path, ec);
  if (ec) throw Error(Errc::io, "cannot remove " + path + ": " + ec.message());
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir + ": " + ec.message());
}

void make_parent_dir(const std::string& file) {
  fs::path parent = fs::path(file).parent_path();
  if (!parent.empty()) make_dir(parent.string());
}

render::MeshStore load_meshes(const std::string& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::io, "mesh directory " + dir + " not found");
  const std::regex name_re("obj_([0-9]{6})\\.(ply|obj)");
  render::MeshStore meshes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, name_re)) {
      log::debug("ignoring non-mesh file " + name);
      continue;
    }
    render::TriMesh mesh = render::load_mesh(entry.path().string());
    mesh.object_id = std::stoi(m[1]);
    meshes.emplace(mesh.object_id, std::move(mesh));
  }
  return meshes;
}

std::string mesh_file_name(int object_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "obj_%06d.ply", object_id);
  return buf;
}

annotate::Rig load_rig(const PipelineConfig& cfg) {
  require_path(cfg.paths.extrinsics, "extrinsics");
  auto extrinsics = calib::load_extrinsics(cfg.paths.extrinsics);
  annotate::Rig rig;
  for (const auto& [id, k] : cfg.cameras) {
    auto it = extrinsics.find(id);
    if (it == extrinsics.end()) {
      log::warn("camera " + id + " has no extrinsics entry; frames using it will fail");
      continue;
    }
    rig.emplace(id, annotate::Camera{it->second, k});
  }
  for (const auto& [id, e] : extrinsics)
    if (!cfg.cameras.count(id)) log::warn("extrinsics entry " + id + " has no configured camera");
  return rig;
}

struct FrameEntry {
  int scene_id = 0;
  double timestamp_s = 0;
  std::string scenario;
  std::vector<std::string> cameras;
};

void write_frame_index(const std::string& path, const std::vector<FrameEntry>& frames) {
  json doc = json::array();
  for (const auto& f : frames)
    doc.push_back(json{{"scene_id", f.scene_id},
                       {"timestamp_s", f.timestamp_s},
                       {"scenario", f.scenario},
                       {"cameras", f.cameras}});
  dump_json(doc, path);
}

std::vector<FrameEntry> load_frame_index(const std::string& path) {
  json doc = load_json(path);
  if (!doc.is_array()) throw Error(Errc::schema, path + ": expected a JSON array");
  std::vector<FrameEntry> frames;
  try {
    for (const json& e : doc) {
      FrameEntry f;
      f.scene_id = e.at("scene_id").get<int>();
      f.timestamp_s = e.at("timestamp_s").get<double>();
      f.scenario = e.value("scenario", "");
      for (const json& c : e.at("cameras")) f.cameras.push_back(c.get<std::string>());
      frames.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::schema, path + ": " + e.what());
  }
  std::sort(frames.begin(), frames.end(),
            [](const FrameEntry& a, const FrameEntry& b) { return a.scene_id < b.scene_id; });
  for (size_t i = 1; i < frames.size(); ++i)
    if (frames[i].scene_id == frames[i - 1].scene_id)
      throw Error(Errc::invalid_argument,
                  path + ": duplicate scene id " + std::to_string(frames[i].scene_id));
  return frames;
}

struct SampleRef {
  std::string camera_id;
  double timestamp_s = 0;
  std::string mask;  // file name relative to the masks directory
};

std::string manifest_path(const std::string& masks_dir) {
  return (fs::path(masks_dir) / "samples.json").string();
}

void write_sample_manifest(const std::string& masks_dir, const std::vector<SampleRef>& refs) {
  json doc = json::array();
  for (const auto& r : refs)
    doc.push_back(json{{"camera_id", r.camera_id}, {"timestamp_s", r.timestamp_s}, {"mask", r.mask}});
  dump_json(doc, manifest_path(masks_dir));
}

std::vector<SampleRef> load_sample_manifest(const std::string& masks_dir) {
  json doc = load_json(manifest_path(masks_dir));
  if (!doc.is_array()) throw Error(Errc::schema, manifest_path(masks_dir) + ": expected a JSON array");
  std::vector<SampleRef> refs;
  try {
    for (const json& e : doc)
      refs.push_back(SampleRef{e.at("camera_id").get<std::string>(),
                               e.at("timestamp_s").get<double>(),
                               e.at("mask").get<std::string>()});
  } catch (const json::exception& e) {
    throw Error(Errc::schema, manifest_path(masks_dir) + ": " + e.what());
  }
  return refs;
}

render::MaskImage load_mask_png(const std::string& path) {
  imgio::Gray8 img = imgio::read_png_gray8(path);
  render::MaskImage mask(img.width, img.height);
  for (size_t i = 0; i < img.pixels.size(); ++i) mask.bits[i] = img.pixels[i] != 0;
  return mask;
}

std::string format_px(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

std::string format_score(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

}  // namespace

Report run_localize(const PipelineConfig& cfg) {
  require_path(cfg.paths.board_observations, "board_observations");
  require_path(cfg.paths.extrinsics, "extrinsics");
  if (cfg.cameras.empty()) throw Error(Errc::schema, "config has no cameras");
  claim_output(cfg.paths.extrinsics, cfg.overwrite, "extrinsics file");

  Report report;
  json jcameras = json::object(), jfailures = json::object();
  std::map<std::string, calib::CameraExtrinsics> extrinsics;
  std::ostringstream text;
  int failed = 0;

  for (const auto& [id, k] : cfg.cameras) {
    std::string obs_path = (fs::path(cfg.paths.board_observations) / (id + ".json")).string();
    try {
      auto observations = board::load_observations(obs_path, cfg.board, k);
      if (!observations.empty() && observations.front().camera_id != id)
        throw Error(Errc::schema, obs_path + " declares camera " +
                                      observations.front().camera_id + ", expected " + id);
      calib::CameraExtrinsics e = calib::localize_camera(cfg.board, observations, k);
      text << id << ": rms " << format_px(e.rms_reprojection_error) << " px ("
           << observations.size() << " placements)\n";
      jcameras[id] = json{{"rms_px", e.rms_reprojection_error},
                          {"placements", observations.size()}};
      extrinsics.emplace(id, std::move(e));
    } catch (const Error& e) {
      if (e.is_io()) throw;  // broken setup aborts; a degenerate camera does not
      text << id << ": failed: " << e.what() << "\n";
      jfailures[id] = e.what();
      ++failed;
    }
  }

  make_parent_dir(cfg.paths.extrinsics);
  calib::save_extrinsics(cfg.paths.extrinsics, extrinsics);
  text << "wrote " << extrinsics.size() << " extrinsics to " << cfg.paths.extrinsics;
  if (failed) text << " (" << failed << " camera" << (failed > 1 ? "s" : "") << " failed)";
  text << "\n";

  report.exit_code = failed ? 2 : 0;
  report.text = text.str();
  report.json = json{{"cameras", jcameras},
                     {"failures", jfailures},
                     {"extrinsics", cfg.paths.extrinsics}}
                    .dump(2);
  return report;
}

Report run_tune(const PipelineConfig& cfg) {
  require_path(cfg.paths.extrinsics, "extrinsics");
  require_path(cfg.paths.masks, "masks");
  require_path(cfg.paths.meshes, "meshes");
  require_path(cfg.paths.mocap_log, "mocap_log");

  auto extrinsics = calib::load_extrinsics(cfg.paths.extrinsics);
  render::MeshStore meshes = load_meshes(cfg.paths.meshes);
  annotate::MocapLog log = annotate::MocapLog::load_csv(cfg.paths.mocap_log);
  std::vector<SampleRef> refs = load_sample_manifest(cfg.paths.masks);
  if (refs.empty())
    throw Error(Errc::invalid_argument, "tuning mask manifest lists no samples");

  std::map<std::string, std::vector<SampleRef>> by_camera;
  for (const auto& r : refs) by_camera[r.camera_id].push_back(r);

  Report report;
  std::ostringstream text;
  json jcameras = json::object();
  int failed = 0;

  for (const auto& [camera_id, camera_refs] : by_camera) {
    auto k_it = cfg.cameras.find(camera_id);
    if (k_it == cfg.cameras.end())
      throw Error(Errc::schema, "tuning manifest references unconfigured camera " + camera_id);
    auto e_it = extrinsics.find(camera_id);
    if (e_it == extrinsics.end()) {
      text << camera_id << ": no extrinsics entry, skipped\n";
      jcameras[camera_id] = json{{"status", "missing_extrinsics"}};
      ++failed;
      continue;
    }
    if (e_it->second.tuned && !cfg.force) {
      text << camera_id << ": already tuned (score "
           << format_score(e_it->second.tuning_score.value_or(0)) << "), skipped; use --force to re-tune\n";
      jcameras[camera_id] = json{{"status", "already_tuned"},
                                 {"score", e_it->second.tuning_score.value_or(0)}};
      continue;
    }

    std::vector<calib::TuningSample> samples;
    for (const auto& r : camera_refs) {
      calib::TuningSample s;
      s.image_id = r.mask;
      s.camera_id = camera_id;
      s.ground_truth_mask = load_mask_png((fs::path(cfg.paths.masks) / r.mask).string());
      for (const auto& state : log.sample_all(r.timestamp_s, cfg.sample_window_s))
        s.objects.emplace_back(state.object_id, state.pose_mc_obj);
      samples.push_back(std::move(s));
    }

    double best_score = 0;
    calib::CameraExtrinsics tuned =
        calib::tune_camera(e_it->second, cfg.grid, samples, meshes, k_it->second,
                           cfg.iou_threshold, cfg.workers, &best_score);
    if (tuned.tuned) {
      text << camera_id << ": tuned, mean IoU " << format_score(best_score) << " (threshold "
           << format_score(cfg.iou_threshold) << ", " << samples.size() << " samples)\n";
      jcameras[camera_id] = json{{"status", "tuned"}, {"score", best_score}};
      e_it->second = tuned;
    } else {
      text << camera_id << ": best mean IoU " << format_score(best_score)
           << " below threshold " << format_score(cfg.iou_threshold) << ", left unchanged\n";
      jcameras[camera_id] = json{{"status", "below_threshold"}, {"score", best_score}};
      ++failed;
    }
  }

  calib::save_extrinsics(cfg.paths.extrinsics, extrinsics);
  text << "updated " << cfg.paths.extrinsics << "\n";

  report.exit_code = failed ? 2 : 0;
  report.text = text.str();
  report.json = json{{"cameras", jcameras}, {"extrinsics", cfg.paths.extrinsics}}.dump(2);
  return report;
}

Report run_annotate(const PipelineConfig& cfg) {
  require_path(cfg.paths.mocap_log, "mocap_log");
  require_path(cfg.paths.frame_index, "frame_index");
  require_path(cfg.paths.meshes, "meshes");
  require_path(cfg.paths.output_root, "output_root");
  claim_output(cfg.paths.output_root, cfg.overwrite, "output root");

  annotate::Rig rig = load_rig(cfg);
  render::MeshStore meshes = load_meshes(cfg.paths.meshes);
  annotate::MocapLog log = annotate::MocapLog::load_csv(cfg.paths.mocap_log);
  std::vector<FrameEntry> frames = load_frame_index(cfg.paths.frame_index);

  bop::DatasetLayout layout{cfg.paths.output_root};
  make_dir(cfg.paths.output_root);

  annotate::AnnotateOptions options = cfg.annotation;
  options.workers = 1;  // scenes are the parallel unit

  std::vector<long> instance_counts(frames.size(), 0);
  auto started = std::chrono::steady_clock::now();
  parallel_for(frames.size(), cfg.workers, [&](size_t i) {
    const FrameEntry& f = frames[i];
    annotate::SceneInput input;
    input.scene_id = f.scene_id;
    input.scenario = f.scenario;
    input.camera_ids = f.cameras;
    input.objects = log.sample_all(f.timestamp_s, cfg.sample_window_s);
    annotate::SceneRecord record = annotate::annotate_scene(rig, meshes, input, options);
    bop::write_scene(record, layout);
    long n = 0;
    for (const auto& view : record.views) n += long(view.annotations.size());
    instance_counts[i] = n;
  });
  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  long total = std::accumulate(instance_counts.begin(), instance_counts.end(), 0L);
  bop::write_dataset_info(layout, elapsed);

  char line[160];
  std::snprintf(line, sizeof(line), "%ld instances in %.2f s (%.1f inst/s)", total,
                elapsed, double(total) / std::max(elapsed, 1e-9));
  std::ostringstream text;
  text << line << "\n"
       << "wrote " << frames.size() << " scenes to " << cfg.paths.output_root << "\n";

  Report report;
  report.text = text.str();
  report.json = json{{"instances", total},
                     {"scenes", frames.size()},
                     {"elapsed_s", elapsed},
                     {"output_root", cfg.paths.output_root}}
                    .dump(2);
  return report;
}

Report run_stats(const PipelineConfig& cfg) {
  require_path(cfg.paths.output_root, "output_root");
  bop::DatasetStats s = bop::stats(bop::DatasetLayout{cfg.paths.output_root});

  json jclasses = json::object();
  for (const auto& [cls, n] : s.instances_per_class) jclasses[std::to_string(cls)] = n;
  json jscenarios = json::object();
  for (const auto& [name, counts] : s.per_scenario)
    jscenarios[name] = json{{"frames", counts.frames}, {"instances", counts.instances}};

  Report report;
  report.text = bop::format_stats(s);
  report.json = json{{"total_frames", s.total_frames},
                     {"total_instances", s.total_instances},
                     {"instances_per_class", jclasses},
                     {"per_scenario", jscenarios},
                     {"annotation_time_s", s.annotation_time_s}}
                    .dump(2);
  return report;
}

Report run_validate(const PipelineConfig& cfg) {
  require_path(cfg.paths.output_root, "output_root");
  bop::DatasetLayout layout{cfg.paths.output_root};
  std::vector<bop::Violation> violations = bop::validate(layout);

  std::ostringstream text;
  const size_t shown = std::min<size_t>(violations.size(), 200);
  for (size_t i = 0; i < shown; ++i)
    text << violations[i].where << ": " << violations[i].message << "\n";
  if (violations.size() > shown)
    text << "... and " << violations.size() - shown << " more\n";
  text << violations.size() << " violation" << (violations.size() == 1 ? "" : "s") << " in "
       << layout.scene_ids().size() << " scenes\n";

  json jviolations = json::array();
  for (const auto& v : violations)
    jviolations.push_back(json{{"where", v.where}, {"message", v.message}});

  Report report;
  report.exit_code = violations.empty() ? 0 : 2;
  report.text = text.str();
  report.json = json{{"violations", jviolations}, {"count", violations.size()}}.dump(2);
  return report;
}

Report run_synth(const PipelineConfig& cfg) {
  require_path(cfg.paths.mocap_log, "mocap_log");
  require_path(cfg.paths.board_observations, "board_observations");
  require_path(cfg.paths.meshes, "meshes");
  require_path(cfg.paths.masks, "masks");
  require_path(cfg.paths.truth_extrinsics, "truth_extrinsics");
  require_path(cfg.paths.frame_index, "frame_index");
  if (cfg.cameras.empty()) throw Error(Errc::schema, "config has no cameras");
  if (cfg.scenarios.empty())
    throw Error(Errc::invalid_argument, "synth needs at least one scenario in synth.scenarios");

  // The generator names ring cameras cam00..camNN; the config must use the
  // same ids so every other command agrees on intrinsics.
  {
    int i = 0;
    for (const auto& [id, k] : cfg.cameras) {
      char expected[16];
      std::snprintf(expected, sizeof(expected), "cam%02d", i++);
      if (id != expected)
        throw Error(Errc::invalid_argument,
                    "synth requires camera ids cam00..cam" +
                        std::to_string(int(cfg.cameras.size()) - 1) + "; found '" + id + "'");
    }
  }

  for (const std::string& target :
       {cfg.paths.mocap_log, cfg.paths.board_observations, cfg.paths.meshes, cfg.paths.masks,
        cfg.paths.truth_extrinsics, cfg.paths.frame_index})
    claim_output(target, cfg.overwrite, "synth output");

  synth::RigSpec rig_spec = cfg.rig;
  rig_spec.camera_count = int(cfg.cameras.size());
  rig_spec.intrinsics = cfg.cameras.begin()->second;
  annotate::Rig rig = synth::generate_rig(rig_spec, cfg.seed);
  for (auto& [id, cam] : rig) cam.intrinsics = cfg.cameras.at(id);

  std::map<std::string, calib::CameraExtrinsics> truth;
  for (const auto& [id, cam] : rig) truth.emplace(id, cam.extrinsics);
  make_parent_dir(cfg.paths.truth_extrinsics);
  calib::save_extrinsics(cfg.paths.truth_extrinsics, truth);

  make_dir(cfg.paths.board_observations);
  auto sessions = synth::generate_board_session(rig, cfg.board, cfg.board_placements,
                                                cfg.corner_noise_px, cfg.seed + 1);
  for (const auto& [camera_id, observations] : sessions)
    board::save_observations(
        (fs::path(cfg.paths.board_observations) / (camera_id + ".json")).string(), camera_id,
        observations);

  // Scenarios share one log/frame index; ids and times are offset so they
  // never collide.
  annotate::MocapLog log;
  std::vector<FrameEntry> frames;
  render::MeshStore meshes;
  int next_scene = 0, next_object = 1;
  double next_start = 0;
  long mocap_rows = 0;
  for (size_t i = 0; i < cfg.scenarios.size(); ++i) {
    synth::ScenarioSpec scenario = cfg.scenarios[i];
    scenario.first_scene_id = next_scene;
    scenario.first_object_id = next_object;
    scenario.start_time_s = next_start;
    scenario.seed = cfg.seed + 17 * (i + 1);
    scenario.sample_window_s = cfg.sample_window_s;
    scenario.min_visible_pixels = cfg.annotation.min_visible_pixels;

    synth::Recording rec = synth::generate_recording(rig, scenario);
    for (auto& [id, track] : rec.log.tracks) {
      mocap_rows += long(track.size());
      log.tracks[id] = std::move(track);
    }
    for (const auto& input : rec.frames)
      frames.push_back(FrameEntry{input.scene_id, 0, input.scenario, input.camera_ids});
    // Frame timestamps are the sampling times the scenario used.
    for (size_t f = 0; f < rec.frames.size(); ++f)
      frames[frames.size() - rec.frames.size() + f].timestamp_s =
          scenario.start_time_s + double(f) / scenario.frame_rate_hz;
    for (auto& [id, mesh] : rec.meshes) meshes.emplace(id, std::move(mesh));

    next_scene += int(rec.frames.size());
    next_object += scenario.object_count;
    next_start += scenario.duration_s + 10.0;
  }

  make_parent_dir(cfg.paths.mocap_log);
  log.save_csv(cfg.paths.mocap_log);
  make_parent_dir(cfg.paths.frame_index);
  write_frame_index(cfg.paths.frame_index, frames);

  make_dir(cfg.paths.meshes);
  for (const auto& [id, mesh] : meshes)
    render::write_ply(mesh, (fs::path(cfg.paths.meshes) / mesh_file_name(id)).string());

  // Tuning masks: union silhouettes rendered at the true extrinsics — the
  // synthetic stand-in for manually created ground-truth masks.
  make_dir(cfg.paths.masks);
  std::vector<SampleRef> sample_refs;
  if (!cfg.scenarios.empty() && !frames.empty()) {
    const synth::ScenarioSpec& sc0 = cfg.scenarios.front();
    double duration = sc0.duration_s;
    for (const auto& [camera_id, cam] : rig) {
      const Pose cam_from_mc = invert(cam.extrinsics.pose_mc_cam);
      for (int j = 0; j < cfg.tuning_samples_per_camera; ++j) {
        double t = (j + 0.5) * duration / cfg.tuning_samples_per_camera;
        std::vector<render::MaskImage> parts;
        for (const auto& state : log.sample_all(t, cfg.sample_window_s)) {
          auto mesh_it = meshes.find(state.object_id);
          if (mesh_it == meshes.end()) continue;
          parts.push_back(render::rasterize_mask(
              mesh_it->second, compose(cam_from_mc, state.pose_mc_obj), cam.intrinsics));
        }
        render::MaskImage mask = parts.empty()
                                     ? render::MaskImage(cam.intrinsics.width, cam.intrinsics.height)
                                     : render::aggregate_masks(parts);
        char name[64];
        std::snprintf(name, sizeof(name), "%s_%03d.png", camera_id.c_str(), j);
        imgio::Gray8 img;
        img.width = mask.width;
        img.height = mask.height;
        img.pixels.resize(mask.bits.size());
        for (size_t b = 0; b < mask.bits.size(); ++b) img.pixels[b] = mask.bits[b] ? 255 : 0;
        imgio::write_png((fs::path(cfg.paths.masks) / name).string(), img);
        sample_refs.push_back(SampleRef{camera_id, t, name});
      }
    }
  }
  write_sample_manifest(cfg.paths.masks, sample_refs);

  std::ostringstream text;
  text << "rig: " << rig.size() << " cameras -> " << cfg.paths.truth_extrinsics << "\n"
       << "board session: " << cfg.board_placements << " placements/camera -> "
       << cfg.paths.board_observations << "\n"
       << "recording: " << frames.size() << " frames, " << mocap_rows << " mocap rows, "
       << meshes.size() << " objects -> " << cfg.paths.mocap_log << "\n"
       << "tuning masks: " << sample_refs.size() << " -> " << cfg.paths.masks << "\n";

  Report report;
  report.text = text.str();
  report.json = json{{"cameras", rig.size()},
                     {"frames", frames.size()},
                     {"mocap_rows", mocap_rows},
                     {"objects", meshes.size()},
                     {"tuning_masks", sample_refs.size()}}
                    .dump(2);
  return report;
}

Report run_overlay(const PipelineConfig& cfg) {
  require_path(cfg.paths.output_root, "output_root");
  require_path(cfg.paths.overlay_root, "overlay_root");
  claim_output(cfg.paths.overlay_root, cfg.overwrite, "overlay root");

  bop::DatasetLayout layout{cfg.paths.output_root};
  // One fixed color per object id, cycling.
  const uint8_t palette[8][3] = {{66, 245, 96},  {245, 66, 66},  {66, 135, 245}, {245, 200, 66},
                                 {200, 66, 245}, {66, 245, 230}, {245, 130, 66}, {240, 240, 240}};

  long written = 0;
  for (int scene_id : layout.scene_ids()) {
    annotate::SceneRecord record = bop::read_scene(layout, scene_id);
    std::string scene_dir =
        (fs::path(cfg.paths.overlay_root) / bop::DatasetLayout::padded(scene_id)).string();
    make_dir(scene_dir);
    for (const auto& view : record.views) {
      int w = view.intrinsics.width, h = view.intrinsics.height;
      imgio::Rgb8 canvas;
      if (view.rgb && view.rgb->width == w && view.rgb->height == h) {
        canvas = *view.rgb;
      } else {
        canvas.width = w;
        canvas.height = h;
        canvas.pixels.assign(size_t(w) * h * 3, 40);
      }
      auto paint = [&](int x, int y, const uint8_t* color) {
        if (x < 0 || x >= w || y < 0 || y >= h) return;
        size_t at = (size_t(y) * w + x) * 3;
        canvas.pixels[at] = color[0];
        canvas.pixels[at + 1] = color[1];
        canvas.pixels[at + 2] = color[2];
      };

      for (const auto& a : view.annotations) {
        const uint8_t* color = palette[a.object_id % 8];
        const render::MaskImage& mask = a.mask;
        for (int y = 0; y < mask.height && y < h; ++y) {
          for (int x = 0; x < mask.width && x < w; ++x) {
            if (!mask.at(x, y)) continue;
            bool boundary = x == 0 || y == 0 || x == mask.width - 1 || y == mask.height - 1 ||
                            !mask.at(x - 1, y) || !mask.at(x + 1, y) || !mask.at(x, y - 1) ||
                            !mask.at(x, y + 1);
            if (boundary) paint(x, y, color);
          }
        }
        for (int x = a.bbox.x; x < a.bbox.x + a.bbox.w; ++x) {
          paint(x, a.bbox.y, color);
          paint(x, a.bbox.y + a.bbox.h - 1, color);
        }
        for (int y = a.bbox.y; y < a.bbox.y + a.bbox.h; ++y) {
          paint(a.bbox.x, y, color);
          paint(a.bbox.x + a.bbox.w - 1, y, color);
        }
      }

      imgio::write_png(
          (fs::path(scene_dir) / (bop::DatasetLayout::padded(view.image_id) + ".png")).string(),
          canvas);
      ++written;
    }
  }

  Report report;
  report.text = "wrote " + std::to_string(written) + " overlay images to " +
                cfg.paths.overlay_root + "\n";
  report.json = json{{"images", written}, {"overlay_root", cfg.paths.overlay_root}}.dump(2);
  return report;
}

}  // namespace poselabel::pipeline
