// Command-line front end: dataset generation, curation, training, evaluation
// and debug rendering, all driven by one validated run configuration.

#include <cstdio>
#include <exception>
#include <functional>

#include <CLI11.hpp>

#include "shell/commands.hpp"

using namespace svr;

int main(int argc, char** argv) {
  CLI::App app{"single-view 3d reconstruction toolkit"};
  app.require_subcommand(1);
  std::function<int()> run;

  shell::GenerateDataArgs gen;
  CLI::App* cg = app.add_subcommand("generate-data", "write a procedural shape dataset");
  cg->add_option("--kind", gen.kind, "synthetic or pseudo-real")
      ->required()
      ->check(CLI::IsMember({"synthetic", "pseudo-real"}));
  cg->add_option("--shapes", gen.shapes, "number of shapes")->required();
  cg->add_option("--seed", gen.seed, "generation seed");
  cg->add_option("--out", gen.out, "output directory")->required();
  cg->add_option("--resolution", gen.resolution, "image resolution");
  cg->add_option("--views", gen.views, "supervision views per synthetic shape");
  cg->add_option("--eval-views", gen.eval_views, "sealed views per pseudo-real shape");
  cg->add_option("--samples-per-ray", gen.samples_per_ray, "render samples per ray");
  cg->callback([&] { run = [&] { return shell::cmd_generate_data(gen); }; });

  shell::CurateArgs cur;
  CLI::App* cc = app.add_subcommand("curate", "filter instances by depth-based occlusion rules");
  cc->add_option("--in", cur.in, "scene directory to read")->required();
  cc->add_option("--out", cur.out, "curated output directory")->required();
  cc->add_option("--seed", cur.seed, "probe sampling seed");
  cc->add_option("--confidence-threshold", cur.confidence_threshold, "minimum confidence");
  cc->add_option("--min-side", cur.min_bbox_side, "minimum bbox side in pixels");
  cc->add_option("--margin", cur.border_margin, "truncation margin in pixels");
  cc->add_option("--deny", cur.denylist, "category denylist entries");
  cc->add_option("--crop", cur.crop_resolution, "kept-crop resolution");
  cc->callback([&] { run = [&] { return shell::cmd_curate(cur); }; });

  shell::TrainArgs tr;
  CLI::App* ct = app.add_subcommand("train", "run the training loop from a config file");
  ct->add_option("--config", tr.config_path, "run configuration JSON")->required();
  ct->add_option("--out", tr.out, "run output directory")->required();
  ct->add_option("--resume", tr.resume, "checkpoint to continue from");
  ct->add_option("--ablate", tr.ablate,
                 "naive-sem | e2e-cycle | no-curriculum | no-selftrain | input-loss-only");
  CLI::Option* seed_opt = ct->add_option("--seed", tr.seed, "override the config seed");
  ct->add_flag("--single-thread", tr.single_thread, "force deterministic serial execution");
  ct->callback([&] {
    tr.has_seed = seed_opt->count() > 0;
    run = [&] { return shell::cmd_train(tr); };
  });

  shell::EvalArgs ev;
  CLI::App* ce = app.add_subcommand("eval", "score a checkpoint on the evaluation suites");
  ce->add_option("--checkpoint", ev.checkpoint, "checkpoint file")->required();
  ce->add_option("--data", ev.data_root, "evaluation dataset root")->required();
  ce->add_option("--out", ev.out, "report output directory")->required();
  ce->add_option("--suite", ev.suite, "semantic | self-consistency | nvs | all")->required();
  ce->add_flag("--single-thread", ev.single_thread, "force deterministic serial execution");
  ce->callback([&] { run = [&] { return shell::cmd_eval(ev); }; });

  shell::RenderArgs rd;
  CLI::App* cr = app.add_subcommand("render", "reconstruct one image and write novel views");
  cr->add_option("--checkpoint", rd.checkpoint, "checkpoint file")->required();
  cr->add_option("--image", rd.image, "input image to reconstruct")->required();
  cr->add_option("--out", rd.out, "frame output directory")->required();
  cr->add_option("--az", rd.azimuths, "azimuth list in degrees")->delimiter(',');
  cr->add_option("--el", rd.elevations, "elevation list in degrees")->delimiter(',');
  cr->add_option("--turntable", rd.turntable, "evenly spaced azimuth frame count");
  cr->add_option("--resolution", rd.resolution, "render resolution override");
  cr->add_flag("--single-thread", rd.single_thread, "force deterministic serial execution");
  cr->callback([&] { run = [&] { return shell::cmd_render(rd); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return shell::kExitUsage;
  }

  try {
    return run();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return shell::kExitRuntime;
  }
}
