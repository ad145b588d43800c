#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

// Per-row / per-point / per-ray bodies shared by the serial and omp kernel
// variants. Keeping the element math in one place guarantees the two variants
// round identically; only the loop scheduling differs.

namespace svr::kernels::detail {

inline void scale_rows(double* c, int i0, int i1, int n, double beta) {
  if (beta == 0.0) {
    std::fill(c + static_cast<size_t>(i0) * n, c + static_cast<size_t>(i1) * n, 0.0);
  } else if (beta != 1.0) {
    for (size_t i = static_cast<size_t>(i0) * n; i < static_cast<size_t>(i1) * n; ++i)
      c[i] *= beta;
  }
}

inline void gemm_row(const double* a, const double* b, double* c, int m, int k, int n,
                     bool trans_a, bool trans_b, int i) {
  double* ci = c + static_cast<size_t>(i) * n;
  if (!trans_a && !trans_b) {
    const double* ai = a + static_cast<size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const double aik = ai[kk];
      const double* bk = b + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  } else if (!trans_a && trans_b) {
    const double* ai = a + static_cast<size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const double* bj = b + static_cast<size_t>(j) * k;
      double s = 0.0;
      for (int kk = 0; kk < k; ++kk) s += ai[kk] * bj[kk];
      ci[j] += s;
    }
  } else if (trans_a && !trans_b) {
    for (int kk = 0; kk < k; ++kk) {
      const double aik = a[static_cast<size_t>(kk) * m + i];
      const double* bk = b + static_cast<size_t>(kk) * n;
      for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  } else {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int kk = 0; kk < k; ++kk)
        s += a[static_cast<size_t>(kk) * m + i] * b[static_cast<size_t>(j) * k + kk];
      ci[j] += s;
    }
  }
}

// Bilinear footprint of one query point on one plane: 4 corner indices and weights.
struct PlaneTap {
  int idx[4];
  double w[4];
};

inline PlaneTap plane_tap(double u, double v, int h, int w) {
  u = std::clamp(u, -1.0, 1.0);
  v = std::clamp(v, -1.0, 1.0);
  const double px = 0.5 * (u + 1.0) * (w - 1);
  const double py = 0.5 * (v + 1.0) * (h - 1);
  int x0 = static_cast<int>(std::floor(px));
  int y0 = static_cast<int>(std::floor(py));
  x0 = std::clamp(x0, 0, w - 1);
  y0 = std::clamp(y0, 0, h - 1);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = px - x0;
  const double fy = py - y0;
  PlaneTap t;
  t.idx[0] = y0 * w + x0;
  t.idx[1] = y0 * w + x1;
  t.idx[2] = y1 * w + x0;
  t.idx[3] = y1 * w + x1;
  t.w[0] = (1.0 - fy) * (1.0 - fx);
  t.w[1] = (1.0 - fy) * fx;
  t.w[2] = fy * (1.0 - fx);
  t.w[3] = fy * fx;
  return t;
}

// (u, v) coordinates of point p on plane `pl` (0: xy, 1: xz, 2: yz).
inline void plane_uv(const double* p, int pl, double& u, double& v) {
  switch (pl) {
    case 0: u = p[0]; v = p[1]; break;
    case 1: u = p[0]; v = p[2]; break;
    default: u = p[1]; v = p[2]; break;
  }
}

inline void gather_point(const double* planes, int h, int w, int c,
                         const double* point, double* out) {
  std::fill(out, out + c, 0.0);
  const size_t plane_stride = static_cast<size_t>(h) * w * c;
  for (int pl = 0; pl < 3; ++pl) {
    double u, v;
    plane_uv(point, pl, u, v);
    const PlaneTap t = plane_tap(u, v, h, w);
    const double* base = planes + pl * plane_stride;
    for (int corner = 0; corner < 4; ++corner) {
      const double* cell = base + static_cast<size_t>(t.idx[corner]) * c;
      const double wgt = t.w[corner];
      for (int ch = 0; ch < c; ++ch) out[ch] += wgt * cell[ch];
    }
  }
}

inline void scatter_point(const double* point, const double* d_out, int h, int w, int c,
                          double* d_planes) {
  const size_t plane_stride = static_cast<size_t>(h) * w * c;
  for (int pl = 0; pl < 3; ++pl) {
    double u, v;
    plane_uv(point, pl, u, v);
    const PlaneTap t = plane_tap(u, v, h, w);
    double* base = d_planes + pl * plane_stride;
    for (int corner = 0; corner < 4; ++corner) {
      double* cell = base + static_cast<size_t>(t.idx[corner]) * c;
      const double wgt = t.w[corner];
      for (int ch = 0; ch < c; ++ch) cell[ch] += wgt * d_out[ch];
    }
  }
}

inline void composite_ray(const double* sigma, const double* rgb, int n_samples,
                          double delta, double* out_rgba) {
  double trans = 1.0;
  double r = 0.0, g = 0.0, b = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const double alpha = 1.0 - std::exp(-sigma[s] * delta);
    const double wgt = trans * alpha;
    const double* cs = rgb + static_cast<size_t>(s) * 3;
    r += wgt * cs[0];
    g += wgt * cs[1];
    b += wgt * cs[2];
    trans *= 1.0 - alpha;
  }
  out_rgba[0] = r;
  out_rgba[1] = g;
  out_rgba[2] = b;
  out_rgba[3] = 1.0 - trans;
}

inline void composite_ray_backward(const double* sigma, const double* rgb, int n_samples,
                                   double delta, const double* d_rgba, double* d_sigma,
                                   double* d_rgb, double* trans_scratch) {
  double trans = 1.0;
  for (int s = 0; s < n_samples; ++s) {
    trans_scratch[s] = trans;
    trans *= std::exp(-sigma[s] * delta);
  }
  const double trans_final = trans;
  // Walk back to front keeping the suffix sum of w_l * <g_rgb, c_l> for l > s.
  double suffix = 0.0;
  for (int s = n_samples - 1; s >= 0; --s) {
    const double att = std::exp(-sigma[s] * delta);
    const double wgt = trans_scratch[s] * (1.0 - att);
    const double* cs = rgb + static_cast<size_t>(s) * 3;
    double* dcs = d_rgb + static_cast<size_t>(s) * 3;
    const double gdotc = d_rgba[0] * cs[0] + d_rgba[1] * cs[1] + d_rgba[2] * cs[2];
    dcs[0] += wgt * d_rgba[0];
    dcs[1] += wgt * d_rgba[1];
    dcs[2] += wgt * d_rgba[2];
    d_sigma[s] += delta * (trans_scratch[s] * att * gdotc - suffix + d_rgba[3] * trans_final);
    suffix += wgt * gdotc;
  }
}

}  // namespace svr::kernels::detail
