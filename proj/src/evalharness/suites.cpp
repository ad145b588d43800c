#include "evalharness/suites.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "core/image.hpp"
#include "dataworld/crop.hpp"
#include "evalharness/metrics.hpp"

namespace svr::evalharness {

using geometry::RelativePose;
using nlohmann::json;
using renderfield::RenderedView;
using renderfield::RenderSettings;

namespace {

class ReconstructorRecon : public EvalReconstruction {
 public:
  ReconstructorRecon(const reconstructor::ReconstructorParams& params,
                     geometry::CameraRig rig, const core::Tensor& input)
      : rig_(rig) {
    const int model_res = params.config.input_resolution;
    core::Tensor fed = input;
    if (input.shape()[0] != model_res || input.shape()[1] != model_res) {
      fed = core::resize_bilinear(input, model_res, model_res);
    }
    planes_ = reconstructor::reconstruct_plain(params, fed);
    reconstructor::decoder_from_params(params, decoder_);
  }

  RenderedView render(const RelativePose& delta, const RenderSettings& settings) override {
    const geometry::CameraPose pose = geometry::compose_relative(delta, rig_);
    return renderfield::render_plain(planes_, decoder_, pose, settings, nullptr);
  }

 private:
  geometry::CameraRig rig_;
  renderfield::Triplane planes_;
  renderfield::FieldDecoder decoder_;
};

class FieldRecon : public EvalReconstruction {
 public:
  FieldRecon(const renderfield::DensityColorField& field, geometry::CameraRig rig)
      : field_(&field), rig_(rig) {}

  RenderedView render(const RelativePose& delta, const RenderSettings& settings) override {
    const geometry::CameraPose pose = geometry::compose_relative(delta, rig_);
    return renderfield::render_field(*field_, pose, settings);
  }

 private:
  const renderfield::DensityColorField* field_;
  geometry::CameraRig rig_;
};

RenderSettings at_resolution(const RenderSettings& base, int resolution) {
  RenderSettings s = base;
  s.resolution = resolution;
  return s;
}

core::Tensor alpha_mask(const core::Tensor& alpha) {
  core::Tensor mask(alpha.shape());
  int on = 0;
  for (std::size_t i = 0; i < alpha.numel(); ++i) {
    if (alpha[i] > 0.5) {
      mask[i] = 1.0;
      ++on;
    }
  }
  if (on == 0) {
    for (std::size_t i = 0; i < mask.numel(); ++i) mask[i] = 1.0;
  }
  return mask;
}

void require_perceptual(const EvalContext& ctx) {
  if (ctx.perceptual == nullptr) {
    throw std::runtime_error("perceptual backend not configured");
  }
}

struct MetricColumn {
  const char* key;
  const char* label;
};

constexpr MetricColumn kColumns[] = {
    {"psnr", "PSNR↑"},
    {"ssim", "SSIM↑"},
    {"perceptual", "perceptual↓"},
    {"embedder_similarity", "similarity↑"},
};

}  // namespace

ReconstructorEvalModel::ReconstructorEvalModel(
    const reconstructor::ReconstructorParams& params, geometry::CameraRig rig)
    : params_(&params), rig_(rig) {}

std::unique_ptr<EvalReconstruction> ReconstructorEvalModel::reconstruct(
    const core::Tensor& input) {
  return std::make_unique<ReconstructorRecon>(*params_, rig_, input);
}

FieldEvalModel::FieldEvalModel(const renderfield::DensityColorField& field,
                               geometry::CameraRig rig)
    : field_(&field), rig_(rig) {}

std::unique_ptr<EvalReconstruction> FieldEvalModel::reconstruct(const core::Tensor&) {
  return std::make_unique<FieldRecon>(*field_, rig_);
}

void MetricsReport::finalize() {
  aggregate.clear();
  if (rows.empty()) return;
  std::map<std::string, std::pair<double, int>> sums;
  for (const InstanceRow& row : rows) {
    for (const auto& [key, value] : row.values) {
      sums[key].first += value;
      sums[key].second += 1;
    }
  }
  for (const auto& [key, acc] : sums) aggregate[key] = acc.first / acc.second;
}

std::string MetricsReport::to_json() const {
  json poses_json = json::array();
  for (const RelativePose& p : poses) {
    poses_json.push_back({{"azimuth", p.azimuth_deg}, {"elevation", p.elevation_deg}});
  }
  json rows_json = json::array();
  for (const InstanceRow& row : rows) {
    rows_json.push_back({{"id", row.id}, {"values", row.values}});
  }
  json doc = {{"suite", suite},
              {"config_hash", config_hash},
              {"poses", poses_json},
              {"crop_ratio", crop_ratio},
              {"views_per_instance", views_per_instance},
              {"fid", "omitted"},
              {"rows", rows_json},
              {"aggregate", aggregate}};
  return doc.dump(2);
}

MetricsReport MetricsReport::from_json(const std::string& text) {
  json doc = json::parse(text);
  MetricsReport report;
  report.suite = doc.at("suite").get<std::string>();
  report.config_hash = doc.at("config_hash").get<std::uint64_t>();
  for (const json& p : doc.at("poses")) {
    report.poses.push_back({p.at("azimuth").get<double>(), p.at("elevation").get<double>()});
  }
  report.crop_ratio = doc.at("crop_ratio").get<double>();
  report.views_per_instance = doc.at("views_per_instance").get<int>();
  report.fid_omitted = doc.at("fid").get<std::string>() == "omitted";
  for (const json& r : doc.at("rows")) {
    InstanceRow row;
    row.id = r.at("id").get<std::string>();
    for (const auto& [key, value] : r.at("values").items()) {
      row.values[key] = value.get<double>();
    }
    report.rows.push_back(std::move(row));
  }
  for (const auto& [key, value] : doc.at("aggregate").items()) {
    report.aggregate[key] = value.get<double>();
  }
  return report;
}

std::string MetricsReport::summary_table() const {
  std::vector<MetricColumn> present;
  for (const MetricColumn& col : kColumns) {
    if (aggregate.count(col.key) > 0) present.push_back(col);
  }
  char buf[160];
  std::string out = "suite: " + suite + "\n";
  std::snprintf(buf, sizeof(buf), "%-18s", "instance");
  out += buf;
  for (const MetricColumn& col : present) {
    std::snprintf(buf, sizeof(buf), "%14s", col.label);
    out += buf;
  }
  out += "\n";
  auto emit = [&](const std::string& id, const std::map<std::string, double>& values) {
    std::snprintf(buf, sizeof(buf), "%-18s", id.c_str());
    out += buf;
    for (const MetricColumn& col : present) {
      auto it = values.find(col.key);
      if (it == values.end()) {
        std::snprintf(buf, sizeof(buf), "%12s", "-");
      } else {
        std::snprintf(buf, sizeof(buf), "%12.4f", it->second);
      }
      out += buf;
    }
    out += "\n";
  };
  for (const InstanceRow& row : rows) emit(row.id, row.values);
  emit("mean", aggregate);
  if (fid_omitted) out += "FID: omitted (no external classifier)\n";
  return out;
}

std::vector<RelativePose> semantic_pose_schedule() {
  std::vector<RelativePose> poses;
  for (int k = 0; k < 7; ++k) {
    double az = k * (360.0 / 7.0);
    if (az > 180.0) az -= 360.0;  // same direction, expressed in [-180, 180]
    poses.push_back({az, 0.0});
  }
  return poses;
}

std::vector<RelativePose> consistency_pose_schedule() {
  const double az[] = {0, 30, 60, -30, -60, 30, 60, -30, -60, 30, 60, -30, -60};
  const double el[] = {0, 0, 0, 0, 0, 30, 30, 30, 30, 60, 60, 60, 60};
  std::vector<RelativePose> poses;
  for (int i = 0; i < 13; ++i) poses.push_back({az[i], el[i]});
  return poses;
}

MetricsReport semantic_similarity_suite(EvalModel& model,
                                        const std::vector<EvalInstance>& instances,
                                        const EvalContext& ctx) {
  if (ctx.embedder == nullptr) throw std::runtime_error("semantic embedder not configured");
  require_perceptual(ctx);
  MetricsReport report;
  report.suite = "semantic";
  report.config_hash = ctx.config_hash;
  report.poses = semantic_pose_schedule();
  report.views_per_instance = static_cast<int>(report.poses.size());
  for (const EvalInstance& instance : instances) {
    auto recon = model.reconstruct(instance.input);
    const int res = instance.input.shape()[0];
    double sim_acc = 0.0, perc_acc = 0.0;
    for (const RelativePose& pose : report.poses) {
      RenderedView view = recon->render(pose, at_resolution(ctx.settings, res));
      const core::Tensor composited =
          renderfield::composite_background(view, renderfield::kGray);
      sim_acc += ctx.embedder->similarity(composited, instance.input);
      perc_acc += perceptual_distance(composited, instance.input, ctx.perceptual);
    }
    InstanceRow row;
    row.id = instance.id;
    row.values["embedder_similarity"] = sim_acc / report.poses.size();
    row.values["perceptual"] = perc_acc / report.poses.size();
    report.rows.push_back(std::move(row));
  }
  report.finalize();
  return report;
}

MetricsReport self_consistency_suite(EvalModel& model,
                                     const std::vector<EvalInstance>& instances,
                                     const EvalContext& ctx) {
  require_perceptual(ctx);
  MetricsReport report;
  report.suite = "self-consistency";
  report.config_hash = ctx.config_hash;
  report.poses = consistency_pose_schedule();
  report.crop_ratio = dataworld::kEvalExpandRatio;
  report.views_per_instance = static_cast<int>(report.poses.size());
  for (const EvalInstance& instance : instances) {
    auto first = model.reconstruct(instance.input);
    const int res = instance.input.shape()[0];
    double psnr_acc = 0.0, ssim_acc = 0.0, perc_acc = 0.0;
    for (const RelativePose& pose : report.poses) {
      RenderedView novel = first->render(pose, at_resolution(ctx.settings, res));
      const core::Tensor composited =
          renderfield::composite_background(novel, renderfield::kGray);
      dataworld::InstanceRecord crop = dataworld::crop_instance(
          composited, alpha_mask(novel.alpha), dataworld::kEvalExpandRatio, res);
      auto second = model.reconstruct(crop.image);
      RenderedView back = second->render(geometry::invert_delta(pose),
                                         at_resolution(ctx.settings, res));
      const core::Tensor closed = renderfield::composite_background(back, renderfield::kGray);
      psnr_acc += psnr(closed, instance.input);
      ssim_acc += ssim(closed, instance.input);
      perc_acc += perceptual_distance(closed, instance.input, ctx.perceptual);
    }
    InstanceRow row;
    row.id = instance.id;
    const double n = static_cast<double>(report.poses.size());
    row.values["psnr"] = psnr_acc / n;
    row.values["ssim"] = ssim_acc / n;
    row.values["perceptual"] = perc_acc / n;
    report.rows.push_back(std::move(row));
  }
  report.finalize();
  return report;
}

MetricsReport nvs_suite(EvalModel& model,
                        const std::vector<dataworld::SealedInstance>& instances,
                        const EvalContext& ctx) {
  require_perceptual(ctx);
  MetricsReport report;
  report.suite = "nvs";
  report.config_hash = ctx.config_hash;
  for (const dataworld::SealedInstance& instance : instances) {
    if (instance.views.empty() || instance.views.size() != instance.poses.size()) {
      throw std::runtime_error("sealed evaluation views missing for instance " + instance.id);
    }
    if (report.views_per_instance == 0) {
      report.views_per_instance = static_cast<int>(instance.views.size());
    }
    auto recon = model.reconstruct(instance.input);
    double psnr_acc = 0.0, ssim_acc = 0.0, perc_acc = 0.0;
    for (std::size_t v = 0; v < instance.views.size(); ++v) {
      const core::Tensor& target = instance.views[v];
      RenderedView view =
          recon->render(instance.poses[v], at_resolution(ctx.settings, target.shape()[0]));
      const core::Tensor composited =
          renderfield::composite_background(view, renderfield::kGray);
      psnr_acc += psnr(composited, target);
      ssim_acc += ssim(composited, target);
      perc_acc += perceptual_distance(composited, target, ctx.perceptual);
    }
    InstanceRow row;
    row.id = instance.id;
    const double n = static_cast<double>(instance.views.size());
    row.values["psnr"] = psnr_acc / n;
    row.values["ssim"] = ssim_acc / n;
    row.values["perceptual"] = perc_acc / n;
    report.rows.push_back(std::move(row));
  }
  report.finalize();
  return report;
}

}  // namespace svr::evalharness
