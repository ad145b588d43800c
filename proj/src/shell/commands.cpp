#include "shell/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>

#include <json.hpp>

#include "core/parallel.hpp"
#include "core/png_io.hpp"
#include "curation/curate.hpp"
#include "dataworld/datasets.hpp"
#include "evalharness/suites.hpp"
#include "selftrain/embedder.hpp"
#include "selftrain/perceptual.hpp"
#include "shell/runconfig.hpp"

namespace svr::shell {

namespace fs = std::filesystem;

namespace {

int usage_error(const std::string& message) {
  std::fprintf(stderr, "error: %s\n", message.c_str());
  return kExitUsage;
}

geometry::RelativePose wrapped_pose(double az, double el) {
  while (az > 180.0) az -= 360.0;
  while (az < -180.0) az += 360.0;
  return {az, el};
}

}  // namespace

int cmd_generate_data(const GenerateDataArgs& args) {
  if (args.out.empty()) return usage_error("generate-data: --out is required");
  if (args.shapes < 1) return usage_error("generate-data: --shapes must be at least 1");
  dataworld::DatasetConfig cfg;
  cfg.resolution = args.resolution;
  cfg.n_views = args.views;
  cfg.n_eval_views = args.eval_views;
  cfg.samples_per_ray = args.samples_per_ray;
  const std::string out = resolve_out_dir(args.out);
  if (args.kind == "synthetic") {
    dataworld::build_synthetic_set(out, args.shapes, cfg, args.seed);
  } else if (args.kind == "pseudo-real") {
    dataworld::build_pseudo_real_set(out, args.shapes, cfg, args.seed);
  } else {
    return usage_error("generate-data: unknown --kind '" + args.kind + "'");
  }
  std::printf("generate-data: wrote %d %s shapes to %s\n", args.shapes, args.kind.c_str(),
              out.c_str());
  return kExitOk;
}

int cmd_curate(const CurateArgs& args) {
  if (args.in.empty() || args.out.empty()) return usage_error("curate: --in and --out are required");
  if (!fs::is_directory(args.in)) return usage_error("curate: input directory not found: " + args.in);
  curation::CurationConfig cfg;
  cfg.seed = args.seed;
  cfg.confidence_threshold = args.confidence_threshold;
  cfg.min_bbox_side = args.min_bbox_side;
  cfg.border_margin = args.border_margin;
  cfg.category_denylist = args.denylist;
  cfg.crop_resolution = args.crop_resolution;
  const std::string out = resolve_out_dir(args.out);
  const curation::CurationReport report = curation::curate_dataset(args.in, out, cfg);
  std::printf("curate: %d scenes, %d instances in, %d kept, %d dropped\n", report.scenes_read,
              report.instances_in, report.kept, report.dropped_total());
  return kExitOk;
}

namespace {

// The named ablation axes: each switches exactly one ingredient off.
bool apply_ablation(const std::string& name, RunConfig& rc) {
  if (name == "naive-sem") {
    rc.train.flags.naive_semantic = true;
  } else if (name == "e2e-cycle") {
    rc.train.flags.e2e_cycle = true;
  } else if (name == "no-curriculum") {
    rc.train.flags.no_curriculum = true;
  } else if (name == "no-selftrain") {
    rc.train.weights.lambda_in = 0.0;
    rc.train.weights.lambda_pix = 0.0;
    rc.train.weights.lambda_sem = 0.0;
  } else if (name == "input-loss-only") {
    rc.train.weights.lambda_pix = 0.0;
    rc.train.weights.lambda_sem = 0.0;
  } else {
    return false;
  }
  return true;
}

}  // namespace

int cmd_train(const TrainArgs& args) {
  if (args.config_path.empty() || args.out.empty())
    return usage_error("train: --config and --out are required");
  if (args.single_thread) core::force_single_thread();

  RunConfig rc = RunConfig::load(args.config_path);
  if (args.has_seed) rc.train.seed = args.seed;
  if (!args.ablate.empty() && !apply_ablation(args.ablate, rc))
    return usage_error("train: unknown --ablate '" + args.ablate + "'");
  rc.validate();

  const std::string out = resolve_out_dir(args.out);
  fs::create_directories(out);
  const std::uint64_t hash = rc.hash();
  rc.save(out + "/config.json");

  const std::vector<selftrain::SynthSample> synth = dataworld::load_synthetic_set(rc.synth_root);
  std::vector<selftrain::RealSample> real;
  if (!rc.real_root.empty()) real = dataworld::load_single_view_set(rc.real_root);

  const selftrain::FallbackEmbedder embedder;
  const selftrain::RandomFeaturePerceptual perceptual;
  const selftrain::TrainState state = selftrain::fit(rc.train, synth, real, embedder, &perceptual,
                                                     out, hash, args.resume);
  std::printf("train: finished at j=%ld, checkpoint in %s\n", state.curriculum.j, out.c_str());
  return kExitOk;
}

int cmd_eval(const EvalArgs& args) {
  if (args.checkpoint.empty() || args.data_root.empty() || args.out.empty())
    return usage_error("eval: --checkpoint, --data and --out are required");
  const bool all = args.suite == "all";
  const bool semantic = all || args.suite == "semantic";
  const bool consistency = all || args.suite == "self-consistency";
  const bool nvs = all || args.suite == "nvs";
  if (!semantic && !consistency && !nvs)
    return usage_error("eval: unknown --suite '" + args.suite + "'");
  if (!fs::exists(args.checkpoint))
    return usage_error("eval: checkpoint not found: " + args.checkpoint);
  if (args.single_thread) core::force_single_thread();

  const selftrain::Checkpoint ck = selftrain::load_checkpoint(args.checkpoint);
  const selftrain::TrainState state = selftrain::state_from_checkpoint(ck);
  evalharness::ReconstructorEvalModel model(state.params, ck.config.setup.rig);

  const std::vector<dataworld::SealedInstance> sealed =
      dataworld::load_sealed_eval_set(args.data_root);
  std::vector<evalharness::EvalInstance> inputs;
  inputs.reserve(sealed.size());
  for (const dataworld::SealedInstance& s : sealed) inputs.push_back({s.id, s.input});

  const selftrain::FallbackEmbedder embedder;
  const selftrain::RandomFeaturePerceptual perceptual;
  evalharness::EvalContext ctx;
  ctx.embedder = &embedder;
  ctx.perceptual = &perceptual;
  ctx.settings = ck.config.setup.render;
  ctx.config_hash = ck.config_hash;

  const std::string out = resolve_out_dir(args.out);
  fs::create_directories(out);
  const auto emit = [&](const evalharness::MetricsReport& report) {
    const std::string path = out + "/report_" + report.suite + ".json";
    std::ofstream f(path);
    if (!f) throw std::runtime_error("eval: cannot write " + path);
    f << report.to_json() << "\n";
    std::printf("%s\n", report.summary_table().c_str());
  };

  if (semantic) emit(evalharness::semantic_similarity_suite(model, inputs, ctx));
  if (consistency) emit(evalharness::self_consistency_suite(model, inputs, ctx));
  if (nvs) emit(evalharness::nvs_suite(model, sealed, ctx));
  return kExitOk;
}

int cmd_render(const RenderArgs& args) {
  if (args.checkpoint.empty() || args.image.empty() || args.out.empty())
    return usage_error("render: --checkpoint, --image and --out are required");
  if (!fs::exists(args.checkpoint))
    return usage_error("render: checkpoint not found: " + args.checkpoint);
  if (!fs::exists(args.image)) return usage_error("render: image not found: " + args.image);
  if (args.turntable < 0) return usage_error("render: --turntable must be positive");
  if (args.turntable > 0 && !args.azimuths.empty())
    return usage_error("render: --turntable and --az are mutually exclusive");

  std::vector<geometry::RelativePose> poses;
  if (args.turntable > 0) {
    for (int k = 0; k < args.turntable; ++k)
      poses.push_back(wrapped_pose(k * 360.0 / args.turntable, 0.0));
  } else {
    std::vector<double> az = args.azimuths.empty() ? std::vector<double>{0.0} : args.azimuths;
    std::vector<double> el = args.elevations;
    if (el.empty()) el.assign(az.size(), 0.0);
    if (el.size() == 1 && az.size() > 1) el.assign(az.size(), el[0]);
    if (el.size() != az.size())
      return usage_error("render: --el must have one entry or match --az");
    for (std::size_t i = 0; i < az.size(); ++i) {
      const geometry::RelativePose p = wrapped_pose(az[i], el[i]);
      if (!p.valid())
        return usage_error("render: pose out of range (elevation must be within [-90, 90])");
      poses.push_back(p);
    }
  }
  if (args.single_thread) core::force_single_thread();

  const selftrain::Checkpoint ck = selftrain::load_checkpoint(args.checkpoint);
  const selftrain::TrainState state = selftrain::state_from_checkpoint(ck);
  evalharness::ReconstructorEvalModel model(state.params, ck.config.setup.rig);

  const core::Tensor input = core::read_png_rgb(args.image);
  const std::unique_ptr<evalharness::EvalReconstruction> recon = model.reconstruct(input);

  renderfield::RenderSettings settings = ck.config.setup.render;
  if (args.resolution > 0) settings.resolution = args.resolution;

  const std::string out = resolve_out_dir(args.out);
  fs::create_directories(out);
  nlohmann::json manifest;
  manifest["config_hash"] = ck.config_hash;
  manifest["frames"] = nlohmann::json::array();
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const renderfield::RenderedView view = recon->render(poses[i], settings);
    const core::Tensor rgb = renderfield::composite_background(view, renderfield::kGray);
    char name[32];
    std::snprintf(name, sizeof(name), "render_%03zu.png", i);
    core::write_png_rgb(out + "/" + name, rgb);
    manifest["frames"].push_back({{"file", name},
                                  {"azimuth", poses[i].azimuth_deg},
                                  {"elevation", poses[i].elevation_deg}});
  }
  std::ofstream f(out + "/frames.json");
  f << manifest.dump(2) << "\n";
  std::printf("render: wrote %zu frames to %s\n", poses.size(), out.c_str());
  return kExitOk;
}

}  // namespace svr::shell
