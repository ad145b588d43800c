#pragma once

#include <vector>

#include "core/param_store.hpp"

namespace svr::selftrain {

struct OptimizerConfig {
  double lr_max = 4e-4;
  long warmup = 150;
  double beta1 = 0.9;
  double beta2 = 0.96;
  double eps = 1e-6;
  double weight_decay = 0.05;
  double clip_norm = 1.0;

  void validate() const;
};

// Linear warmup to lr_max over `warmup` steps, then cosine decay to zero at
// j_max. lr(0) = 0 (for warmup > 0), lr(warmup) = lr_max.
double schedule_lr(const OptimizerConfig& cfg, long j, long j_max);

// Decoupled-weight-decay adaptive-moment update with global gradient clipping.
class Optimizer {
public:
  Optimizer(const OptimizerConfig& cfg, const core::ParamStore& params);

  struct StepInfo {
    double grad_norm = 0.0;  // pre-clip global norm
    double clip_scale = 1.0;
    double lr = 0.0;
  };

  // Applies one update in place. grads must be in store order; they are
  // consumed as-is (clipping scales the update, not the caller's buffers).
  StepInfo step(core::ParamStore& params, const std::vector<core::Tensor>& grads, long j,
                long j_max);

  const OptimizerConfig& config() const { return cfg_; }
  long updates() const { return updates_; }
  const std::vector<core::Tensor>& moment1() const { return m_; }
  const std::vector<core::Tensor>& moment2() const { return v_; }
  void restore(long updates, std::vector<core::Tensor> m, std::vector<core::Tensor> v);

private:
  OptimizerConfig cfg_;
  long updates_ = 0;
  std::vector<core::Tensor> m_, v_;
};

}  // namespace svr::selftrain
