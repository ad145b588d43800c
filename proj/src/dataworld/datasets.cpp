#include "dataworld/datasets.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "core/png_io.hpp"

namespace svr::dataworld {

namespace fs = std::filesystem;
using core::Rng;
using core::Tensor;
using geometry::RelativePose;

namespace {

constexpr uint64_t kSynthTag = 0x73796e7468736574;
constexpr uint64_t kRealTag = 0x7265616c736574;

std::string shape_id(int i) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%04d", i);
  return buf;
}

renderfield::RenderSettings render_settings(const DatasetConfig& cfg) {
  renderfield::RenderSettings s;
  s.resolution = cfg.resolution;
  s.samples_per_ray = cfg.samples_per_ray;
  return s;
}

RelativePose draw_view_pose(Rng& rng) {
  for (;;) {
    const RelativePose p{rng.uniform(-kPoseAzimuthMax, kPoseAzimuthMax),
                         rng.uniform(-kPoseElevationMax, kPoseElevationMax)};
    if (p.azimuth_deg != 0.0 || p.elevation_deg != 0.0) return p;  // never exactly canonical
  }
}

nlohmann::json pose_entry(const RelativePose& p, const geometry::CameraRig& rig) {
  return {{"azimuth", p.azimuth_deg},
          {"elevation", p.elevation_deg},
          {"radius", rig.radius},
          {"fov_deg", rig.fov_deg}};
}

void write_view_png(const std::string& path, const renderfield::RenderedView& view) {
  core::write_png_rgb(path, renderfield::composite_background(view, renderfield::kGray));
}

void replace_dir(const fs::path& tmp, const fs::path& final_dir) {
  fs::remove_all(final_dir);
  fs::rename(tmp, final_dir);
}

bool has_sealed_component(const fs::path& path) {
  for (const auto& part : path)
    if (part == kSealedDirName) return true;
  return false;
}

Tensor training_read_png(const std::string& path, AccessLog* log) {
  if (has_sealed_component(fs::path(path)))
    throw std::runtime_error("training loader refuses sealed evaluation data: " + path);
  if (log != nullptr) log->opened.push_back(path);
  return core::read_png_rgb(path);
}

std::string training_read_text(const std::string& path, AccessLog* log) {
  if (has_sealed_component(fs::path(path)))
    throw std::runtime_error("training loader refuses sealed evaluation data: " + path);
  if (log != nullptr) log->opened.push_back(path);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<fs::path> sorted_subdirs(const fs::path& root) {
  std::vector<fs::path> dirs;
  if (!fs::exists(root)) throw std::runtime_error("dataset folder missing: " + root.string());
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

}  // namespace

void build_synthetic_set(const std::string& root, int n_shapes, const DatasetConfig& cfg,
                         uint64_t seed) {
  if (n_shapes < 1) throw std::invalid_argument("build_synthetic_set: need at least one shape");
  const renderfield::RenderSettings settings = render_settings(cfg);
  const fs::path base = fs::path(root) / "shapes";
  fs::create_directories(base);
  for (int i = 0; i < n_shapes; ++i) {
    Rng rng(core::mix64(seed, kSynthTag, static_cast<uint64_t>(i)));
    const ToyShape shape = generate_shape(rng.next(), cfg.synth_params);
    std::vector<RelativePose> poses(1, RelativePose{0.0, 0.0});
    for (int v = 0; v < cfg.n_views; ++v) poses.push_back(draw_view_pose(rng));

    std::vector<geometry::CameraPose> cams;
    for (const RelativePose& p : poses) cams.push_back(geometry::compose_relative(p, cfg.rig));
    const auto views = render_shape_views(shape, cams, settings);

    const fs::path tmp = base / (".tmp-" + shape_id(i));
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    write_view_png((tmp / "input.png").string(), views[0]);
    nlohmann::json cameras;
    cameras["input"] = pose_entry(poses[0], cfg.rig);
    cameras["views"] = nlohmann::json::array();
    for (int v = 0; v < cfg.n_views; ++v) {
      write_view_png((tmp / ("view_" + std::to_string(v) + ".png")).string(),
                     views[static_cast<size_t>(v) + 1]);
      cameras["views"].push_back(pose_entry(poses[static_cast<size_t>(v) + 1], cfg.rig));
    }
    std::ofstream(tmp / "cameras.json") << cameras.dump(2) << "\n";
    replace_dir(tmp, base / shape_id(i));
  }
}

ToyShape pseudo_real_shape(uint64_t seed, int index, const DatasetConfig& cfg) {
  Rng rng(core::mix64(seed, kRealTag, static_cast<uint64_t>(index)));
  return generate_shape(rng.next(), cfg.real_params);
}

void build_pseudo_real_set(const std::string& root, int n_shapes, const DatasetConfig& cfg,
                           uint64_t seed) {
  if (n_shapes < 1) throw std::invalid_argument("build_pseudo_real_set: need at least one shape");
  const renderfield::RenderSettings settings = render_settings(cfg);
  const fs::path base = fs::path(root) / "pseudo_real";
  fs::create_directories(base);
  for (int i = 0; i < n_shapes; ++i) {
    Rng rng(core::mix64(seed, kRealTag, static_cast<uint64_t>(i)));
    const ToyShape shape = generate_shape(rng.next(), cfg.real_params);
    std::vector<RelativePose> poses(1, RelativePose{0.0, 0.0});
    for (int v = 0; v < cfg.n_eval_views; ++v) poses.push_back(draw_view_pose(rng));

    std::vector<geometry::CameraPose> cams;
    for (const RelativePose& p : poses) cams.push_back(geometry::compose_relative(p, cfg.rig));
    const auto views = render_shape_views(shape, cams, settings);

    const fs::path tmp = base / (".tmp-" + shape_id(i));
    fs::remove_all(tmp);
    fs::create_directories(tmp / kSealedDirName);
    write_view_png((tmp / "input.png").string(), views[0]);
    nlohmann::json cameras;
    cameras["input"] = pose_entry(poses[0], cfg.rig);
    cameras["views"] = nlohmann::json::array();
    for (int v = 0; v < cfg.n_eval_views; ++v) {
      write_view_png((tmp / kSealedDirName / ("view_" + std::to_string(v) + ".png")).string(),
                     views[static_cast<size_t>(v) + 1]);
      cameras["views"].push_back(pose_entry(poses[static_cast<size_t>(v) + 1], cfg.rig));
    }
    std::ofstream(tmp / kSealedDirName / "cameras.json") << cameras.dump(2) << "\n";
    replace_dir(tmp, base / shape_id(i));
  }
}

std::vector<selftrain::SynthSample> load_synthetic_set(const std::string& root, AccessLog* log) {
  std::vector<selftrain::SynthSample> out;
  for (const fs::path& dir : sorted_subdirs(fs::path(root) / "shapes")) {
    selftrain::SynthSample s;
    s.input = training_read_png((dir / "input.png").string(), log);
    const nlohmann::json cameras =
        nlohmann::json::parse(training_read_text((dir / "cameras.json").string(), log));
    int v = 0;
    for (const auto& entry : cameras.at("views")) {
      s.views.push_back(training_read_png((dir / ("view_" + std::to_string(v) + ".png")).string(),
                                          log));
      s.poses.push_back({entry.at("azimuth").get<double>(), entry.at("elevation").get<double>()});
      ++v;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<selftrain::RealSample> load_single_view_set(const std::string& root, AccessLog* log) {
  std::vector<selftrain::RealSample> out;
  for (const fs::path& dir : sorted_subdirs(fs::path(root) / "pseudo_real"))
    out.push_back({training_read_png((dir / "input.png").string(), log)});
  return out;
}

std::vector<SealedInstance> load_sealed_eval_set(const std::string& root) {
  std::vector<SealedInstance> out;
  for (const fs::path& dir : sorted_subdirs(fs::path(root) / "pseudo_real")) {
    SealedInstance inst;
    inst.id = dir.filename().string();
    inst.input = core::read_png_rgb((dir / "input.png").string());
    const fs::path sealed = dir / kSealedDirName;
    if (!fs::exists(sealed / "cameras.json"))
      throw std::runtime_error("sealed evaluation views missing under " + dir.string());
    std::ifstream in(sealed / "cameras.json");
    const nlohmann::json cameras = nlohmann::json::parse(in);
    int v = 0;
    for (const auto& entry : cameras.at("views")) {
      inst.views.push_back(
          core::read_png_rgb((sealed / ("view_" + std::to_string(v) + ".png")).string()));
      inst.poses.push_back({entry.at("azimuth").get<double>(), entry.at("elevation").get<double>()});
      ++v;
    }
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace svr::dataworld
