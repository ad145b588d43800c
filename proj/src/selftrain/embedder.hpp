#pragma once

#include "ad/ops.hpp"
#include "core/tensor.hpp"

namespace svr::selftrain {

// Image -> unit-norm feature vector. Implementations must be deterministic and
// produce identical values through the tape and plain entry points.
class SemanticEmbedder {
public:
  virtual ~SemanticEmbedder() = default;
  // (H,W,3) image var -> flat unit-norm feature var (gradients flow through).
  virtual ad::Var embed(ad::Tape& t, ad::Var image) const = 0;
  // Plain evaluation of the same map.
  core::Tensor embed_plain(const core::Tensor& image) const;
  // <f(a), f(b)> on plain tensors.
  double similarity(const core::Tensor& a, const core::Tensor& b) const;
};

// Built-in deterministic embedder: resize to 32x32, soft gradient-orientation
// histograms (8 bins) pooled over 4x4 cells, plus 4x4 mean colors, jointly
// L2-normalized with a constant anchor component that keeps the norm defined
// for degenerate all-black inputs.
class FallbackEmbedder : public SemanticEmbedder {
public:
  ad::Var embed(ad::Tape& t, ad::Var image) const override;

  static constexpr int kWorkingRes = 32;
  static constexpr int kCell = 4;
  static constexpr int kBins = 8;
};

}  // namespace svr::selftrain
