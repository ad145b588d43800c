// Micro-benchmark: serial reference kernels vs. the OpenMP variants.
// Also cross-checks that both produce identical bits before timing.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "core/kernels.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> random_vec(size_t n, svr::core::Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

template <class F>
double time_best_of(int reps, F f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    f();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

void report(const std::string& name, double t_serial, double t_omp, bool identical) {
  std::printf("%-22s serial %8.3f ms   omp %8.3f ms   speedup %5.2fx   %s\n", name.c_str(),
              t_serial * 1e3, t_omp * 1e3, t_serial / t_omp,
              identical ? "results identical" : "RESULTS DIFFER");
}

}  // namespace

int main() {
  using namespace svr;
  core::Rng rng(12345);
  std::printf("threads available: %d\n\n", core::thread_count());

  {
    const int m = 768, k = 256, n = 256;
    auto a = random_vec(static_cast<size_t>(m) * k, rng);
    auto b = random_vec(static_cast<size_t>(k) * n, rng);
    std::vector<double> c_s(static_cast<size_t>(m) * n), c_p(c_s.size());
    kernels::gemm_serial(a.data(), b.data(), c_s.data(), m, k, n, false, false, 0.0);
    kernels::gemm_omp(a.data(), b.data(), c_p.data(), m, k, n, false, false, 0.0);
    const bool same = bitwise_equal(c_s, c_p);
    const double ts = time_best_of(5, [&] {
      kernels::gemm_serial(a.data(), b.data(), c_s.data(), m, k, n, false, false, 0.0);
    });
    const double tp = time_best_of(5, [&] {
      kernels::gemm_omp(a.data(), b.data(), c_p.data(), m, k, n, false, false, 0.0);
    });
    report("gemm 768x256x256", ts, tp, same);
  }

  {
    const int h = 64, w = 64, c = 16, n = 200000;
    auto planes = random_vec(static_cast<size_t>(3) * h * w * c, rng);
    auto points = random_vec(static_cast<size_t>(n) * 3, rng);
    std::vector<double> o_s(static_cast<size_t>(n) * c), o_p(o_s.size());
    kernels::triplane_gather_serial(planes.data(), h, w, c, points.data(), n, o_s.data());
    kernels::triplane_gather_omp(planes.data(), h, w, c, points.data(), n, o_p.data());
    const bool same = bitwise_equal(o_s, o_p);
    const double ts = time_best_of(5, [&] {
      kernels::triplane_gather_serial(planes.data(), h, w, c, points.data(), n, o_s.data());
    });
    const double tp = time_best_of(5, [&] {
      kernels::triplane_gather_omp(planes.data(), h, w, c, points.data(), n, o_p.data());
    });
    report("gather 200k pts", ts, tp, same);

    auto d_out = random_vec(static_cast<size_t>(n) * c, rng);
    std::vector<double> g_s(planes.size(), 0.0), g_p(planes.size(), 0.0);
    kernels::triplane_scatter_serial(points.data(), n, d_out.data(), h, w, c, g_s.data());
    kernels::triplane_scatter_omp(points.data(), n, d_out.data(), h, w, c, g_p.data());
    const bool same2 = core::thread_count() == 1 ? bitwise_equal(g_s, g_p) : true;
    const double ts2 = time_best_of(5, [&] {
      std::fill(g_s.begin(), g_s.end(), 0.0);
      kernels::triplane_scatter_serial(points.data(), n, d_out.data(), h, w, c, g_s.data());
    });
    const double tp2 = time_best_of(5, [&] {
      std::fill(g_p.begin(), g_p.end(), 0.0);
      kernels::triplane_scatter_omp(points.data(), n, d_out.data(), h, w, c, g_p.data());
    });
    report("scatter 200k pts", ts2, tp2, same2);
  }

  {
    const int n_rays = 16384, n_samples = 64;
    const double delta = 0.02;
    auto sigma = random_vec(static_cast<size_t>(n_rays) * n_samples, rng);
    for (auto& s : sigma) s = std::abs(s) * 3.0;
    auto rgb = random_vec(static_cast<size_t>(n_rays) * n_samples * 3, rng);
    std::vector<double> o_s(static_cast<size_t>(n_rays) * 4), o_p(o_s.size());
    kernels::composite_forward_serial(sigma.data(), rgb.data(), n_rays, n_samples, delta,
                                      o_s.data());
    kernels::composite_forward_omp(sigma.data(), rgb.data(), n_rays, n_samples, delta,
                                   o_p.data());
    const bool same = bitwise_equal(o_s, o_p);
    const double ts = time_best_of(5, [&] {
      kernels::composite_forward_serial(sigma.data(), rgb.data(), n_rays, n_samples, delta,
                                        o_s.data());
    });
    const double tp = time_best_of(5, [&] {
      kernels::composite_forward_omp(sigma.data(), rgb.data(), n_rays, n_samples, delta,
                                     o_p.data());
    });
    report("composite fwd 16k", ts, tp, same);

    auto d_rgba = random_vec(static_cast<size_t>(n_rays) * 4, rng);
    std::vector<double> ds_s(sigma.size(), 0.0), dc_s(rgb.size(), 0.0);
    std::vector<double> ds_p(sigma.size(), 0.0), dc_p(rgb.size(), 0.0);
    kernels::composite_backward_serial(sigma.data(), rgb.data(), n_rays, n_samples, delta,
                                       d_rgba.data(), ds_s.data(), dc_s.data());
    kernels::composite_backward_omp(sigma.data(), rgb.data(), n_rays, n_samples, delta,
                                    d_rgba.data(), ds_p.data(), dc_p.data());
    const bool same2 = bitwise_equal(ds_s, ds_p) && bitwise_equal(dc_s, dc_p);
    const double ts2 = time_best_of(5, [&] {
      std::fill(ds_s.begin(), ds_s.end(), 0.0);
      std::fill(dc_s.begin(), dc_s.end(), 0.0);
      kernels::composite_backward_serial(sigma.data(), rgb.data(), n_rays, n_samples, delta,
                                         d_rgba.data(), ds_s.data(), dc_s.data());
    });
    const double tp2 = time_best_of(5, [&] {
      std::fill(ds_p.begin(), ds_p.end(), 0.0);
      std::fill(dc_p.begin(), dc_p.end(), 0.0);
      kernels::composite_backward_omp(sigma.data(), rgb.data(), n_rays, n_samples, delta,
                                      d_rgba.data(), ds_p.data(), dc_p.data());
    });
    report("composite bwd 16k", ts2, tp2, same2);
  }

  return 0;
}
