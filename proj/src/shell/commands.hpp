#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace svr::shell {

// Exit codes shared by every command.
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct GenerateDataArgs {
  std::string kind;  // "synthetic" | "pseudo-real"
  std::string out;
  int shapes = 0;
  std::uint64_t seed = 0;
  int resolution = 64;
  int views = 4;
  int eval_views = 5;
  int samples_per_ray = 48;
};
int cmd_generate_data(const GenerateDataArgs& args);

struct CurateArgs {
  std::string in;
  std::string out;
  std::uint64_t seed = 0;
  double confidence_threshold = 0.3;
  int min_bbox_side = 100;
  int border_margin = 10;
  std::vector<std::string> denylist;
  int crop_resolution = 128;
};
int cmd_curate(const CurateArgs& args);

struct TrainArgs {
  std::string config_path;
  std::string out;
  std::string resume;
  std::string ablate;  // empty or one of the named ablation axes
  bool has_seed = false;
  std::uint64_t seed = 0;  // overrides the config seed when has_seed
  bool single_thread = false;
};
int cmd_train(const TrainArgs& args);

struct EvalArgs {
  std::string checkpoint;
  std::string data_root;
  std::string out;
  std::string suite;  // "semantic" | "self-consistency" | "nvs" | "all"
  bool single_thread = false;
};
int cmd_eval(const EvalArgs& args);

struct RenderArgs {
  std::string checkpoint;
  std::string image;
  std::string out;
  std::vector<double> azimuths;
  std::vector<double> elevations;
  int turntable = 0;  // > 0: that many evenly spaced azimuths at elevation 0
  int resolution = 0;  // 0: the checkpoint's training render resolution
  bool single_thread = false;
};
int cmd_render(const RenderArgs& args);

}  // namespace svr::shell
