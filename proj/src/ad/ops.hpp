#pragma once

#include <array>
#include <memory>
#include <vector>

#include "ad/tape.hpp"

namespace svr::ad {

// Elementwise (shapes must match exactly).
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var div(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double s);
Var add_scalar(Tape& t, Var a, double s);
Var relu(Tape& t, Var a);
Var gelu(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);
Var softplus(Tape& t, Var a);
Var sqrt_stable(Tape& t, Var a, double eps);

// Linear algebra. 2-D operands; trans flags transpose the stored buffer.
Var matmul(Tape& t, Var a, Var b, bool trans_a = false, bool trans_b = false);
Var linear(Tape& t, Var x, Var w, Var bias);  // x (m,k) * w (k,n) + bias (n)
Var add_rowvec(Tape& t, Var a, Var v);

// Row-wise normalizations on (m, n).
Var softmax_rows(Tape& t, Var a);
Var layernorm_rows(Tape& t, Var x, Var gain, Var bias, double eps = 1e-5);

// Reductions to scalar.
Var sum(Tape& t, Var a);
Var mean(Tape& t, Var a);
Var dot(Tape& t, Var a, Var b);
Var mse(Tape& t, Var a, Var b);

// Flat L2 normalization: x / sqrt(sum x^2 + eps).
Var l2_normalize(Tape& t, Var a, double eps);

// Shape ops.
Var reshape(Tape& t, Var a, std::vector<int> shape);
Var slice_cols(Tape& t, Var a, int c0, int len);
Var concat_cols(Tape& t, const std::vector<Var>& parts);
Var concat_flat(Tape& t, const std::vector<Var>& parts);

// Image ops on (H, W, C).
// im2col with zero padding: output ((H+2p-kh)/s+1)*((W+2p-kw)/s+1) rows of kh*kw*C.
Var im2col(Tape& t, Var img, int kh, int kw, int stride, int pad);
Var bilinear_resize(Tape& t, Var img, int out_h, int out_w);
Var block_mean(Tape& t, Var img, int bh, int bw);

// Rendering ops.
// Sample a (3, h, w, c) triplane at fixed query points (n, 3) -> (n, c).
Var triplane_sample(Tape& t, Var planes, std::shared_ptr<const Tensor> points);
// Front-to-back compositing: sigma (P), rgb (P, 3), P = n_rays * n_samples,
// constant step delta -> (n_rays, 4) rgb + alpha.
Var composite_rays(Tape& t, Var sigma, Var rgb, int n_rays, int n_samples, double delta);
// rgba (R, 4) over a constant background color -> (R, 3).
Var composite_over(Tape& t, Var rgba, const std::array<double, 3>& bg);

// Upsampler data movement: token row ((p*q + pr)*q + pc) carries a 2x2xc patch
// of plane p at patch (pr, pc); entry (dy*2+dx)*c + ch -> plane[p, 2*pr+dy, 2*pc+dx, ch].
// tokens (3*q*q, 4c) -> planes (3, 2q, 2q, c).
Var tokens_to_planes(Tape& t, Var tokens, int plane_size, int channels);

}  // namespace svr::ad
