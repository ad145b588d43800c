#pragma once

#include <string>
#include <vector>

#include "dataworld/shapes.hpp"
#include "selftrain/losses.hpp"

namespace svr::dataworld {

struct DatasetConfig {
  int resolution = 64;
  int n_views = 4;       // supervision views per synthetic shape
  int n_eval_views = 5;  // sealed evaluation views per pseudo-real shape
  int samples_per_ray = 48;
  geometry::CameraRig rig;
  ShapeParams synth_params{1.8, 4.0, 4};
  ShapeParams real_params{0.7, 1.5, 4};  // shifted exponents: the domain gap
};

constexpr double kPoseAzimuthMax = 120.0;
constexpr double kPoseElevationMax = 45.0;
constexpr char kSealedDirName[] = "sealed_eval";

// <root>/shapes/<id>/{input.png, view_0..n-1.png, cameras.json}
void build_synthetic_set(const std::string& root, int n_shapes, const DatasetConfig& cfg,
                         uint64_t seed);

// <root>/pseudo_real/<id>/{input.png, sealed_eval/{view_0..k-1.png, cameras.json}}
void build_pseudo_real_set(const std::string& root, int n_shapes, const DatasetConfig& cfg,
                           uint64_t seed);

// The exact analytic field behind pseudo-real instance `index` of a set built
// with the same (seed, cfg); lets evaluation code calibrate against a perfect
// reconstruction.
ToyShape pseudo_real_shape(uint64_t seed, int index, const DatasetConfig& cfg);

// Records every file the training path opens; loaders refuse sealed paths.
struct AccessLog {
  std::vector<std::string> opened;
};

// Training-side loaders. Both throw if asked to touch anything under a sealed
// evaluation folder and record each opened file in the log when given.
std::vector<selftrain::SynthSample> load_synthetic_set(const std::string& root,
                                                       AccessLog* log = nullptr);
std::vector<selftrain::RealSample> load_single_view_set(const std::string& root,
                                                        AccessLog* log = nullptr);

// Evaluation-side view of a pseudo-real instance, sealed views included.
struct SealedInstance {
  std::string id;
  core::Tensor input;
  std::vector<core::Tensor> views;
  std::vector<geometry::RelativePose> poses;
};
std::vector<SealedInstance> load_sealed_eval_set(const std::string& root);

}  // namespace svr::dataworld
