#include "curation/curate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "core/image.hpp"
#include "core/png_io.hpp"
#include "core/serialize.hpp"
#include "curation/boundary.hpp"
#include "dataworld/crop.hpp"

namespace svr::curation {

namespace fs = std::filesystem;
using nlohmann::json;

const char* reason_name(DropReason reason) {
  switch (reason) {
    case DropReason::none: return "none";
    case DropReason::low_confidence: return "low-confidence";
    case DropReason::small: return "small";
    case DropReason::truncated: return "truncated";
    case DropReason::category: return "category";
    case DropReason::occluded: return "occluded";
    case DropReason::degenerate_boundary: return "degenerate-boundary";
  }
  return "unknown";
}

bool filter_confidence(double confidence, double threshold) {
  return confidence >= threshold;
}

DropReason filter_small_truncated(const core::Tensor& mask, int min_bbox_side,
                                  int border_margin) {
  if (mask.shape().size() != 2) throw std::invalid_argument("mask must be (H,W)");
  core::Box box;
  if (!core::mask_bbox(mask, box)) return DropReason::degenerate_boundary;
  if (box.width() < min_bbox_side || box.height() < min_bbox_side) {
    return DropReason::small;
  }
  const int h = static_cast<int>(mask.shape()[0]);
  const int w = static_cast<int>(mask.shape()[1]);
  if (box.x0 < border_margin || box.y0 < border_margin ||
      box.x1 >= w - border_margin || box.y1 >= h - border_margin) {
    return DropReason::truncated;
  }
  return DropReason::none;
}

bool filter_category(const std::string& category, const std::vector<std::string>& denylist) {
  return std::find(denylist.begin(), denylist.end(), category) == denylist.end();
}

namespace {

CurationVerdict drop(DropReason reason) {
  CurationVerdict v;
  v.keep = false;
  v.reason = reason;
  return v;
}

int clamp_index(double x, int n) {
  int i = static_cast<int>(std::lround(x));
  return std::min(std::max(i, 0), n - 1);
}

}  // namespace

CurationVerdict occlusion_verdict(const SceneRecord& scene, int instance_index,
                                  const CurationConfig& cfg, core::Rng& rng) {
  const int n_instances = static_cast<int>(scene.masks.size());
  if (instance_index < 0 || instance_index >= n_instances) {
    throw std::out_of_range("instance index");
  }
  const core::Tensor& mask = scene.masks[instance_index];
  core::Box box;
  if (!core::mask_bbox(mask, box)) return drop(DropReason::degenerate_boundary);

  core::Tensor band = instance_boundary(mask);
  std::vector<core::Tensor> other_bands;
  for (int j = 0; j < n_instances; ++j) {
    if (j != instance_index) other_bands.push_back(instance_boundary(scene.masks[j]));
  }
  core::Tensor contact = contact_boundary(band, other_bands);

  std::vector<std::pair<int, int>> contact_pixels;
  const int h = static_cast<int>(mask.shape()[0]);
  const int w = static_cast<int>(mask.shape()[1]);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (contact.at(r, c) > 0.5) contact_pixels.emplace_back(r, c);
    }
  }
  CurationVerdict verdict;
  if (contact_pixels.empty()) {
    verdict.keep = true;
    return verdict;
  }

  const double scale = 0.5 * (box.width() + box.height());
  const double step = cfg.probe_step_frac * scale;
  NormalField field = make_normal_field(mask);

  for (int k = 0; k < cfg.probe_count; ++k) {
    const auto [row, col] = contact_pixels[rng.uniform_int(static_cast<int>(contact_pixels.size()))];
    ProbeDiag diag;
    diag.row = row;
    diag.col = col;
    BoundaryNormal normal;
    if (query_normal(field, row, col, normal) == NormalStatus::ok) {
      const int ri = clamp_index(row - step * normal.ny, h);
      const int ci = clamp_index(col - step * normal.nx, w);
      const int ro = clamp_index(row + step * normal.ny, h);
      const int co = clamp_index(col + step * normal.nx, w);
      const double d_inner = scene.inverse_depth.at(ri, ci);
      const double d_outer = scene.inverse_depth.at(ro, co);
      diag.accepted = true;
      diag.ratio = d_inner / std::max(d_outer, 1e-12);
      diag.occluded = diag.ratio < cfg.depth_ratio_threshold;
    }
    verdict.probes.push_back(diag);
    if (diag.accepted) {
      ++verdict.probes_accepted;
      if (diag.occluded) ++verdict.probes_occluded;
    }
  }
  if (verdict.probes_accepted == 0) {
    verdict.reason = DropReason::degenerate_boundary;
    return verdict;
  }
  verdict.vote_fraction =
      static_cast<double>(verdict.probes_occluded) / verdict.probes_accepted;
  if (verdict.vote_fraction >= cfg.occluded_vote_frac) {
    verdict.reason = DropReason::occluded;
    return verdict;
  }
  verdict.keep = true;
  return verdict;
}

CurationVerdict curate_instance(const SceneRecord& scene, int instance_index,
                                const CurationConfig& cfg, core::Rng& rng) {
  const InstanceMeta& meta = scene.instances.at(instance_index);
  if (!filter_confidence(meta.confidence, cfg.confidence_threshold)) {
    return drop(DropReason::low_confidence);
  }
  DropReason frame = filter_small_truncated(scene.masks.at(instance_index),
                                            cfg.min_bbox_side, cfg.border_margin);
  if (frame != DropReason::none) return drop(frame);
  if (!filter_category(meta.category, cfg.category_denylist)) {
    return drop(DropReason::category);
  }
  return occlusion_verdict(scene, instance_index, cfg, rng);
}

int CurationReport::dropped_total() const {
  int total = 0;
  for (const auto& [reason, count] : dropped) total += count;
  return total;
}

SceneRecord load_scene(const std::string& dir) {
  const fs::path root(dir);
  SceneRecord scene;
  scene.name = root.filename().string();
  scene.image = core::read_png_rgb((root / "image.png").string());
  scene.inverse_depth = core::read_png_gray((root / "depth.png").string());
  if (scene.inverse_depth.shape()[0] != scene.image.shape()[0] ||
      scene.inverse_depth.shape()[1] != scene.image.shape()[1]) {
    throw std::runtime_error("depth size mismatch in " + dir);
  }
  std::ifstream in(root / "meta.json");
  if (!in) throw std::runtime_error("missing meta.json in " + dir);
  json meta = json::parse(in);
  for (const json& entry : meta.at("instances")) {
    InstanceMeta info;
    info.id = entry.at("id").get<std::string>();
    info.confidence = entry.value("confidence", 1.0);
    info.category = entry.value("category", std::string());
    core::Tensor mask = core::read_png_gray((root / "masks" / (info.id + ".png")).string());
    if (mask.shape() != scene.inverse_depth.shape()) {
      throw std::runtime_error("mask size mismatch for " + info.id + " in " + dir);
    }
    for (std::size_t i = 0; i < mask.numel(); ++i) mask[i] = mask[i] > 0.5 ? 1.0 : 0.0;
    scene.instances.push_back(std::move(info));
    scene.masks.push_back(std::move(mask));
  }
  return scene;
}

void save_scene(const SceneRecord& scene, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root / "masks");
  core::write_png_rgb((root / "image.png").string(), scene.image);
  core::write_png_gray16((root / "depth.png").string(), scene.inverse_depth);
  json instances = json::array();
  for (std::size_t i = 0; i < scene.instances.size(); ++i) {
    const InstanceMeta& info = scene.instances[i];
    core::write_png_gray8((root / "masks" / (info.id + ".png")).string(), scene.masks[i]);
    core::Box box;
    json bbox = json::array({0, 0, 0, 0});
    if (core::mask_bbox(scene.masks[i], box)) {
      bbox = json::array({box.x0, box.y0, box.width(), box.height()});
    }
    instances.push_back({{"id", info.id},
                         {"confidence", info.confidence},
                         {"category", info.category},
                         {"bbox", bbox}});
  }
  std::ofstream out(root / "meta.json");
  out << json{{"instances", instances}}.dump(2) << "\n";
}

CurationReport curate_dataset(const std::string& in_root, const std::string& out_root,
                              const CurationConfig& cfg) {
  if (!fs::exists(in_root)) {
    throw std::runtime_error("curation input folder missing: " + in_root);
  }
  std::vector<fs::path> scene_dirs;
  for (const auto& entry : fs::directory_iterator(in_root)) {
    if (entry.is_directory()) scene_dirs.push_back(entry.path());
  }
  std::sort(scene_dirs.begin(), scene_dirs.end());

  fs::create_directories(fs::path(out_root) / "kept");
  std::ofstream manifest(fs::path(out_root) / "manifest.jsonl");
  if (!manifest) throw std::runtime_error("cannot write manifest under " + out_root);

  CurationReport report;
  for (const fs::path& dir : scene_dirs) {
    SceneRecord scene;
    try {
      scene = load_scene(dir.string());
    } catch (const std::exception& err) {
      std::cerr << "skipping unreadable scene " << dir << ": " << err.what() << "\n";
      ++report.scenes_unreadable;
      continue;
    }
    ++report.scenes_read;
    for (std::size_t idx = 0; idx < scene.instances.size(); ++idx) {
      ++report.instances_in;
      core::Rng rng(core::mix64(cfg.seed, core::fnv1a(scene.name),
                                static_cast<std::uint64_t>(idx)));
      CurationVerdict verdict = curate_instance(scene, static_cast<int>(idx), cfg, rng);
      json row = {{"scene", scene.name},
                  {"id", scene.instances[idx].id},
                  {"keep", verdict.keep},
                  {"reason", reason_name(verdict.reason)},
                  {"probes_accepted", verdict.probes_accepted},
                  {"probes_occluded", verdict.probes_occluded},
                  {"vote_fraction", verdict.vote_fraction}};
      manifest << row.dump() << "\n";
      if (!verdict.keep) {
        ++report.dropped[reason_name(verdict.reason)];
        continue;
      }
      ++report.kept;
      const double ratio = dataworld::sample_train_expand_ratio(rng);
      dataworld::InstanceRecord crop = dataworld::crop_instance(
          scene.image, scene.masks[idx], ratio, cfg.crop_resolution);
      const fs::path kept_dir =
          fs::path(out_root) / "kept" / (scene.name + "_" + scene.instances[idx].id);
      fs::create_directories(kept_dir);
      core::write_png_rgb((kept_dir / "image.png").string(), crop.image);
      std::ofstream meta(kept_dir / "meta.json");
      meta << json{{"scene", scene.name},
                   {"id", scene.instances[idx].id},
                   {"expand_ratio", ratio}}
                  .dump(2)
           << "\n";
    }
  }
  json summary = {{"scenes_read", report.scenes_read},
                  {"scenes_unreadable", report.scenes_unreadable},
                  {"instances", report.instances_in},
                  {"kept", report.kept},
                  {"dropped", report.dropped}};
  std::ofstream out(fs::path(out_root) / "report.json");
  out << summary.dump(2) << "\n";
  return report;
}

}  // namespace svr::curation
