#include "selftrain/perceptual.hpp"

#include <cmath>
#include <stdexcept>

namespace svr::selftrain {

using ad::Tape;
using ad::Var;
using core::Rng;
using core::Tensor;

double PerceptualBackend::distance_plain(const Tensor& a, const Tensor& b) const {
  Tape t;
  return t.val(distance(t, t.constant(a), t.constant(b)))[0];
}

RandomFeaturePerceptual::RandomFeaturePerceptual(uint64_t seed) {
  Rng rng(core::mix64(seed, 0x70657263));
  int in_ch = 3;
  for (int l = 0; l < kLevels; ++l) {
    Tensor k({9 * in_ch, kFeatures});
    const double std_dev = 1.0 / std::sqrt(9.0 * in_ch);
    for (size_t i = 0; i < k.numel(); ++i) k[i] = rng.normal() * std_dev;
    kernels_.push_back(std::move(k));
    in_ch = kFeatures;
  }
}

std::vector<Var> RandomFeaturePerceptual::features(Tape& t, Var img) const {
  const Tensor& x0 = t.val(img);
  if (x0.rank() != 3 || x0.dim(2) != 3)
    throw std::invalid_argument("RandomFeaturePerceptual: image must be (H,W,3)");
  std::vector<Var> feats;
  Var x = img;
  for (int l = 0; l < kLevels; ++l) {
    const Tensor& xv = t.val(x);
    const int h = xv.dim(0), w = xv.dim(1);
    if (h < 4 || w < 4) break;
    Var cols = ad::im2col(t, x, 3, 3, 1, 1);
    Var conv = ad::relu(t, ad::matmul(t, cols, t.constant(kernels_[static_cast<size_t>(l)])));
    Var fmap = ad::reshape(t, conv, {h, w, kFeatures});
    feats.push_back(fmap);
    x = ad::block_mean(t, fmap, 2, 2);
  }
  return feats;
}

Var RandomFeaturePerceptual::distance(Tape& t, Var a, Var b) const {
  const std::vector<Var> fa = features(t, a);
  const std::vector<Var> fb = features(t, b);
  if (fa.size() != fb.size() || fa.empty())
    throw std::invalid_argument("RandomFeaturePerceptual: images too small or shapes differ");
  Var total = ad::mse(t, fa[0], fb[0]);
  for (size_t l = 1; l < fa.size(); ++l)
    total = ad::add(t, total, ad::mse(t, fa[l], fb[l]));
  return total;
}

}  // namespace svr::selftrain
