#include <vector>

#include "core/kernels.hpp"
#include "core/kernels_detail.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace svr::kernels {

void gemm_omp(const double* a, const double* b, double* c, int m, int k, int n,
              bool trans_a, bool trans_b, double beta) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) {
    detail::scale_rows(c, i, i + 1, n, beta);
    detail::gemm_row(a, b, c, m, k, n, trans_a, trans_b, i);
  }
}

void triplane_gather_omp(const double* planes, int h, int w, int c,
                         const double* points, int n, double* out) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    detail::gather_point(planes, h, w, c, points + static_cast<size_t>(i) * 3,
                         out + static_cast<size_t>(i) * c);
}

void triplane_scatter_omp(const double* points, int n, const double* d_out,
                          int h, int w, int c, double* d_planes) {
  // Per-thread buffers reduced in thread order: deterministic for a fixed
  // thread count, and identical to the serial variant on one thread.
  const size_t plane_elems = static_cast<size_t>(3) * h * w * c;
#ifdef _OPENMP
  const int n_threads = omp_get_max_threads();
#else
  const int n_threads = 1;
#endif
  std::vector<std::vector<double>> bufs(n_threads);
#pragma omp parallel
  {
#ifdef _OPENMP
    const int tid = omp_get_thread_num();
#else
    const int tid = 0;
#endif
    auto& buf = bufs[tid];
    buf.assign(plane_elems, 0.0);
#pragma omp for schedule(static)
    for (int i = 0; i < n; ++i)
      detail::scatter_point(points + static_cast<size_t>(i) * 3,
                            d_out + static_cast<size_t>(i) * c, h, w, c, buf.data());
  }
  for (int t = 0; t < n_threads; ++t) {
    if (bufs[t].empty()) continue;
    const double* buf = bufs[t].data();
    for (size_t j = 0; j < plane_elems; ++j) d_planes[j] += buf[j];
  }
}

void composite_forward_omp(const double* sigma, const double* rgb, int n_rays,
                           int n_samples, double delta, double* out_rgba) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < n_rays; ++r)
    detail::composite_ray(sigma + static_cast<size_t>(r) * n_samples,
                          rgb + static_cast<size_t>(r) * n_samples * 3, n_samples,
                          delta, out_rgba + static_cast<size_t>(r) * 4);
}

void composite_backward_omp(const double* sigma, const double* rgb, int n_rays,
                            int n_samples, double delta, const double* d_out_rgba,
                            double* d_sigma, double* d_rgb) {
#pragma omp parallel
  {
    std::vector<double> scratch(n_samples);
#pragma omp for schedule(static)
    for (int r = 0; r < n_rays; ++r)
      detail::composite_ray_backward(sigma + static_cast<size_t>(r) * n_samples,
                                     rgb + static_cast<size_t>(r) * n_samples * 3,
                                     n_samples, delta,
                                     d_out_rgba + static_cast<size_t>(r) * 4,
                                     d_sigma + static_cast<size_t>(r) * n_samples,
                                     d_rgb + static_cast<size_t>(r) * n_samples * 3,
                                     scratch.data());
  }
}

}  // namespace svr::kernels
