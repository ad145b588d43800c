#include "selftrain/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace svr::selftrain {

using core::ParamStore;
using core::Tensor;

void OptimizerConfig::validate() const {
  if (lr_max < 0.0 || warmup < 0 || beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 ||
      beta2 >= 1.0 || eps <= 0.0 || weight_decay < 0.0 || clip_norm <= 0.0)
    throw std::invalid_argument("OptimizerConfig: invalid hyperparameter");
}

double schedule_lr(const OptimizerConfig& cfg, long j, long j_max) {
  if (j < 0 || j_max < 1) throw std::invalid_argument("schedule_lr: need j >= 0, j_max >= 1");
  if (cfg.warmup > 0 && j < cfg.warmup)
    return cfg.lr_max * static_cast<double>(j) / static_cast<double>(cfg.warmup);
  if (j_max <= cfg.warmup) return cfg.lr_max;
  const double frac =
      static_cast<double>(j - cfg.warmup) / static_cast<double>(j_max - cfg.warmup);
  return cfg.lr_max * 0.5 * (1.0 + std::cos(M_PI * std::min(frac, 1.0)));
}

Optimizer::Optimizer(const OptimizerConfig& cfg, const ParamStore& params) : cfg_(cfg) {
  cfg_.validate();
  m_.reserve(static_cast<size_t>(params.size()));
  v_.reserve(static_cast<size_t>(params.size()));
  for (int i = 0; i < params.size(); ++i) {
    m_.emplace_back(params.at(i).shape());
    v_.emplace_back(params.at(i).shape());
  }
}

Optimizer::StepInfo Optimizer::step(ParamStore& params, const std::vector<Tensor>& grads,
                                    long j, long j_max) {
  if (grads.size() != m_.size()) throw std::invalid_argument("Optimizer: gradient count mismatch");
  StepInfo info;
  info.lr = schedule_lr(cfg_, j, j_max);

  double sq = 0.0;
  for (const Tensor& g : grads)
    for (size_t k = 0; k < g.numel(); ++k) sq += g[k] * g[k];
  info.grad_norm = std::sqrt(sq);
  info.clip_scale = info.grad_norm > cfg_.clip_norm ? cfg_.clip_norm / info.grad_norm : 1.0;

  ++updates_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(updates_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(updates_));

  for (size_t i = 0; i < m_.size(); ++i) {
    Tensor& p = params.at(static_cast<int>(i));
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    const Tensor& g = grads[i];
    if (g.shape() != p.shape()) throw std::invalid_argument("Optimizer: gradient shape mismatch");
    for (size_t k = 0; k < p.numel(); ++k) {
      const double gc = g[k] * info.clip_scale;
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * gc;
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * gc * gc;
      const double mhat = m[k] / bc1;
      const double vhat = v[k] / bc2;
      p[k] -= info.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * p[k]);
    }
  }
  return info;
}

void Optimizer::restore(long updates, std::vector<Tensor> m, std::vector<Tensor> v) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw std::invalid_argument("Optimizer: moment count mismatch");
  updates_ = updates;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace svr::selftrain
