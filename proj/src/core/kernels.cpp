#include "core/kernels.hpp"

#include "core/parallel.hpp"

namespace svr::kernels {

using core::ExecMode;
using core::exec_mode;

void gemm(const double* a, const double* b, double* c, int m, int k, int n,
          bool trans_a, bool trans_b, double beta) {
  if (exec_mode() == ExecMode::serial)
    gemm_serial(a, b, c, m, k, n, trans_a, trans_b, beta);
  else
    gemm_omp(a, b, c, m, k, n, trans_a, trans_b, beta);
}

void triplane_gather(const double* planes, int h, int w, int c,
                     const double* points, int n, double* out) {
  if (exec_mode() == ExecMode::serial)
    triplane_gather_serial(planes, h, w, c, points, n, out);
  else
    triplane_gather_omp(planes, h, w, c, points, n, out);
}

void triplane_scatter(const double* points, int n, const double* d_out,
                      int h, int w, int c, double* d_planes) {
  if (exec_mode() == ExecMode::serial)
    triplane_scatter_serial(points, n, d_out, h, w, c, d_planes);
  else
    triplane_scatter_omp(points, n, d_out, h, w, c, d_planes);
}

void composite_forward(const double* sigma, const double* rgb, int n_rays,
                       int n_samples, double delta, double* out_rgba) {
  if (exec_mode() == ExecMode::serial)
    composite_forward_serial(sigma, rgb, n_rays, n_samples, delta, out_rgba);
  else
    composite_forward_omp(sigma, rgb, n_rays, n_samples, delta, out_rgba);
}

void composite_backward(const double* sigma, const double* rgb, int n_rays,
                        int n_samples, double delta, const double* d_out_rgba,
                        double* d_sigma, double* d_rgb) {
  if (exec_mode() == ExecMode::serial)
    composite_backward_serial(sigma, rgb, n_rays, n_samples, delta, d_out_rgba,
                              d_sigma, d_rgb);
  else
    composite_backward_omp(sigma, rgb, n_rays, n_samples, delta, d_out_rgba,
                           d_sigma, d_rgb);
}

}  // namespace svr::kernels
