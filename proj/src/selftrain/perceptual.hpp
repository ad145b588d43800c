#pragma once

#include <vector>

#include "ad/ops.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace svr::selftrain {

// Perceptual (feature-space) image distance. Must be symmetric, zero on
// identical inputs, and differentiable through the tape entry point.
class PerceptualBackend {
public:
  virtual ~PerceptualBackend() = default;
  virtual ad::Var distance(ad::Tape& t, ad::Var a, ad::Var b) const = 0;
  double distance_plain(const core::Tensor& a, const core::Tensor& b) const;
};

// Fixed random-weight convolutional feature pyramid: three conv+relu levels
// with 2x2 mean downsampling between them; the distance is the summed MSE of
// the level features. Weights are frozen at construction from the seed.
class RandomFeaturePerceptual : public PerceptualBackend {
public:
  explicit RandomFeaturePerceptual(uint64_t seed = 0x9e3779b9);
  ad::Var distance(ad::Tape& t, ad::Var a, ad::Var b) const override;

  static constexpr int kLevels = 3;
  static constexpr int kFeatures = 8;

private:
  std::vector<ad::Var> features(ad::Tape& t, ad::Var img) const;
  std::vector<core::Tensor> kernels_;  // (9*C_in, kFeatures) per level
};

}  // namespace svr::selftrain
