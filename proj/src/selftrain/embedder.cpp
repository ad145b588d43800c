#include "selftrain/embedder.hpp"

#include <cmath>
#include <stdexcept>

namespace svr::selftrain {

using ad::Tape;
using ad::Var;
using core::Tensor;

Tensor SemanticEmbedder::embed_plain(const Tensor& image) const {
  Tape t;
  return t.val(embed(t, t.constant(image)));
}

double SemanticEmbedder::similarity(const Tensor& a, const Tensor& b) const {
  const Tensor fa = embed_plain(a);
  const Tensor fb = embed_plain(b);
  if (fa.numel() != fb.numel())
    throw std::invalid_argument("SemanticEmbedder: feature sizes differ");
  double s = 0.0;
  for (size_t i = 0; i < fa.numel(); ++i) s += fa[i] * fb[i];
  return s;
}

Var FallbackEmbedder::embed(Tape& t, Var image) const {
  const Tensor& img = t.val(image);
  if (img.rank() != 3 || img.dim(2) != 3)
    throw std::invalid_argument("FallbackEmbedder: image must be (H,W,3)");
  const int res = kWorkingRes;
  Var r = (img.dim(0) == res && img.dim(1) == res) ? image
                                                   : ad::bilinear_resize(t, image, res, res);

  // luminance
  Var flat = ad::reshape(t, r, {res * res, 3});
  Var gray = ad::matmul(t, flat, t.constant(Tensor({3, 1}, {0.299, 0.587, 0.114})));

  // Sobel responses via one 9-tap convolution on the (res,res,1) image
  Var gimg = ad::reshape(t, gray, {res, res, 1});
  Var cols = ad::im2col(t, gimg, 3, 3, 1, 1);
  const Tensor sobel({9, 2}, {-1, -1, 0, -2, 1, -1,   // rows of (gx, gy) taps
                              -2, 0, 0, 0, 2, 0,      //
                              -1, 1, 0, 2, 1, 1});
  Var g2 = ad::matmul(t, cols, t.constant(sobel));
  Var gx = ad::slice_cols(t, g2, 0, 1);
  Var gy = ad::slice_cols(t, g2, 1, 1);
  Var mag = ad::sqrt_stable(t, ad::add(t, ad::mul(t, gx, gx), ad::mul(t, gy, gy)), 1e-8);
  Var denom = ad::add_scalar(t, mag, 1e-4);

  std::vector<Var> bins;
  bins.reserve(kBins);
  for (int b = 0; b < kBins; ++b) {
    const double theta = b * (2.0 * M_PI / kBins);
    Var proj = ad::add(t, ad::scale(t, gx, std::cos(theta)), ad::scale(t, gy, std::sin(theta)));
    Var rp = ad::relu(t, proj);
    bins.push_back(ad::div(t, ad::mul(t, rp, rp), denom));
  }
  Var hist = ad::reshape(t, ad::concat_cols(t, bins), {res, res, kBins});
  Var pooled = ad::block_mean(t, hist, kCell, kCell);
  const int cells = res / kCell;
  Var hist_flat = ad::reshape(t, pooled, {cells * cells * kBins});

  Var colors = ad::block_mean(t, r, kCell, kCell);
  Var color_flat = ad::reshape(t, colors, {cells * cells * 3});

  Var anchor = t.constant(Tensor({1}, {1.0}));
  Var feat = ad::concat_flat(t, {hist_flat, color_flat, anchor});
  return ad::l2_normalize(t, feat, 1e-12);
}

}  // namespace svr::selftrain
