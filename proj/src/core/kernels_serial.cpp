#include <vector>

#include "core/kernels.hpp"
#include "core/kernels_detail.hpp"

namespace svr::kernels {

void gemm_serial(const double* a, const double* b, double* c, int m, int k, int n,
                 bool trans_a, bool trans_b, double beta) {
  detail::scale_rows(c, 0, m, n, beta);
  for (int i = 0; i < m; ++i) detail::gemm_row(a, b, c, m, k, n, trans_a, trans_b, i);
}

void triplane_gather_serial(const double* planes, int h, int w, int c,
                            const double* points, int n, double* out) {
  for (int i = 0; i < n; ++i)
    detail::gather_point(planes, h, w, c, points + static_cast<size_t>(i) * 3,
                         out + static_cast<size_t>(i) * c);
}

void triplane_scatter_serial(const double* points, int n, const double* d_out,
                             int h, int w, int c, double* d_planes) {
  // Accumulate into a zeroed buffer first, then add once. The omp variant
  // reduces per-thread buffers the same way, so both paths round identically.
  std::vector<double> buf(static_cast<size_t>(3) * h * w * c, 0.0);
  for (int i = 0; i < n; ++i)
    detail::scatter_point(points + static_cast<size_t>(i) * 3,
                          d_out + static_cast<size_t>(i) * c, h, w, c, buf.data());
  for (size_t j = 0; j < buf.size(); ++j) d_planes[j] += buf[j];
}

void composite_forward_serial(const double* sigma, const double* rgb, int n_rays,
                              int n_samples, double delta, double* out_rgba) {
  for (int r = 0; r < n_rays; ++r)
    detail::composite_ray(sigma + static_cast<size_t>(r) * n_samples,
                          rgb + static_cast<size_t>(r) * n_samples * 3, n_samples,
                          delta, out_rgba + static_cast<size_t>(r) * 4);
}

void composite_backward_serial(const double* sigma, const double* rgb, int n_rays,
                               int n_samples, double delta, const double* d_out_rgba,
                               double* d_sigma, double* d_rgb) {
  std::vector<double> scratch(n_samples);
  for (int r = 0; r < n_rays; ++r)
    detail::composite_ray_backward(sigma + static_cast<size_t>(r) * n_samples,
                                   rgb + static_cast<size_t>(r) * n_samples * 3,
                                   n_samples, delta,
                                   d_out_rgba + static_cast<size_t>(r) * 4,
                                   d_sigma + static_cast<size_t>(r) * n_samples,
                                   d_rgb + static_cast<size_t>(r) * n_samples * 3,
                                   scratch.data());
}

}  // namespace svr::kernels
