#pragma once

#include <functional>
#include <string>
#include <vector>

#include "selftrain/losses.hpp"
#include "selftrain/optim.hpp"

namespace svr::selftrain {

// Everything needed to reproduce a training run.
struct TrainConfig {
  reconstructor::ModelConfig model;
  OptimizerConfig optim;
  LossWeights weights;
  TrainFlags flags;
  TrainSetup setup;
  long j_max = 2000;
  double theta_min_deg = 15.0, theta_max_deg = 90.0;
  double phi_min_deg = 15.0, phi_max_deg = 90.0;
  int batch_synth = 4;
  int batch_real = 4;
  long checkpoint_every = 500;
  uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json(const std::string& text);
};

struct TrainState {
  reconstructor::ReconstructorParams params;
  Optimizer opt;
  CurriculumState curriculum;
  core::Rng rng;

  TrainState(const TrainConfig& cfg);
};

struct StepMetrics {
  long j = 0;
  double lr = 0.0;
  double grad_norm = 0.0;
  double loss_total = 0.0;
  double loss_synth = 0.0;
  double loss_self = 0.0;
  double loss_in = 0.0, loss_pix = 0.0, loss_sem = 0.0;
  double theta_bound = 0.0, phi_bound = 0.0;
};

// One optimizer update over half synthetic, half single-view samples. The real
// half may be empty only when every single-view loss weight is zero.
StepMetrics train_step(TrainState& state, const TrainConfig& cfg,
                       const std::vector<SynthSample>& synth_batch,
                       const std::vector<RealSample>& real_batch,
                       const SemanticEmbedder& embedder, const PerceptualBackend* perceptual);

// Pure function of (seed, stream tag, step): dataset indices for one batch,
// cycling through seeded reshuffles on exhaustion.
std::vector<int> batch_indices(uint64_t seed, uint64_t stream, int dataset_size, int batch,
                               long step);

using StepCallback = std::function<void(const StepMetrics&)>;

// Full training loop: j_max steps, JSONL log, periodic checkpoints. Returns
// the final state. resume_from (optional) continues an interrupted run.
TrainState fit(const TrainConfig& cfg, const std::vector<SynthSample>& synth_set,
               const std::vector<RealSample>& real_set, const SemanticEmbedder& embedder,
               const PerceptualBackend* perceptual, const std::string& out_dir,
               uint64_t config_hash, const std::string& resume_from = "",
               const StepCallback& on_step = nullptr);

// Versioned checkpoint: config, iteration, parameters, optimizer moments and
// the training rng stream. Round-trips losslessly.
void save_checkpoint(const std::string& path, const TrainConfig& cfg, const TrainState& state,
                     uint64_t config_hash);
struct Checkpoint {
  TrainConfig config;
  uint64_t config_hash = 0;
  long j = 0;
  long opt_updates = 0;
  std::vector<core::Tensor> params, m, v;
  std::array<uint64_t, 4> rng_state{};
};
Checkpoint load_checkpoint(const std::string& path);
TrainState state_from_checkpoint(const Checkpoint& ck);

}  // namespace svr::selftrain
