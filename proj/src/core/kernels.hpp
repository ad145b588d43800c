#pragma once

#include <cstddef>

namespace svr::kernels {

// C (m x n) = beta * C + op(A) * op(B).
// op(A) is (m x k); with trans_a the buffer holds A as (k x m). Same for B.
// The omp variant parallelizes over rows of C and is bitwise identical to
// the serial variant for any thread count (each row is owned by one thread).
void gemm(const double* a, const double* b, double* c, int m, int k, int n,
          bool trans_a, bool trans_b, double beta);
void gemm_serial(const double* a, const double* b, double* c, int m, int k, int n,
                 bool trans_a, bool trans_b, double beta);
void gemm_omp(const double* a, const double* b, double* c, int m, int k, int n,
              bool trans_a, bool trans_b, double beta);

// Trilinear-free triplane lookup: for each query point (x,y,z) in [-1,1]^3
// (clamped), bilinearly sample each of the three axis-aligned feature planes
// (xy, xz, yz) and sum the three feature vectors.
// planes: (3, h, w, c) row-major. points: (n, 3). out: (n, c).
void triplane_gather(const double* planes, int h, int w, int c,
                     const double* points, int n, double* out);
void triplane_gather_serial(const double* planes, int h, int w, int c,
                            const double* points, int n, double* out);
void triplane_gather_omp(const double* planes, int h, int w, int c,
                         const double* points, int n, double* out);

// Adjoint of triplane_gather: accumulate d_out (n, c) into d_planes (3, h, w, c).
// The omp variant reduces per-thread buffers in thread order, which matches the
// serial point order when running on one thread.
void triplane_scatter(const double* points, int n, const double* d_out,
                      int h, int w, int c, double* d_planes);
void triplane_scatter_serial(const double* points, int n, const double* d_out,
                             int h, int w, int c, double* d_planes);
void triplane_scatter_omp(const double* points, int n, const double* d_out,
                          int h, int w, int c, double* d_planes);

// Emission-absorption compositing along rays with constant step delta.
// sigma: (n_rays * n_samples), rgb: (n_rays * n_samples, 3), front to back.
// out_rgba: (n_rays, 4) = accumulated rgb and alpha (alpha = 1 - prod(1 - a_k)).
void composite_forward(const double* sigma, const double* rgb, int n_rays,
                       int n_samples, double delta, double* out_rgba);
void composite_forward_serial(const double* sigma, const double* rgb, int n_rays,
                              int n_samples, double delta, double* out_rgba);
void composite_forward_omp(const double* sigma, const double* rgb, int n_rays,
                           int n_samples, double delta, double* out_rgba);

// Adjoint of composite_forward. Accumulates into d_sigma and d_rgb.
void composite_backward(const double* sigma, const double* rgb, int n_rays,
                        int n_samples, double delta, const double* d_out_rgba,
                        double* d_sigma, double* d_rgb);
void composite_backward_serial(const double* sigma, const double* rgb, int n_rays,
                               int n_samples, double delta, const double* d_out_rgba,
                               double* d_sigma, double* d_rgb);
void composite_backward_omp(const double* sigma, const double* rgb, int n_rays,
                            int n_samples, double delta, const double* d_out_rgba,
                            double* d_sigma, double* d_rgb);

}  // namespace svr::kernels
