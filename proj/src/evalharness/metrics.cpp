#include "evalharness/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "core/image.hpp"

namespace svr::evalharness {

namespace {

void check_shapes(const core::Tensor& a, const core::Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(what) + ": image shapes differ");
  }
}

}  // namespace

double psnr(const core::Tensor& a, const core::Tensor& b) {
  check_shapes(a, b, "psnr");
  if (a.numel() == 0) throw std::invalid_argument("psnr: empty images");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.numel());
  if (mse < 1e-10) return kPsnrCap;
  return -10.0 * std::log10(mse);
}

double ssim(const core::Tensor& a, const core::Tensor& b) {
  check_shapes(a, b, "ssim");
  const core::Tensor ga = a.shape().size() == 3 ? core::to_gray(a) : a;
  const core::Tensor gb = b.shape().size() == 3 ? core::to_gray(b) : b;
  const int h = ga.shape()[0];
  const int w = ga.shape()[1];
  constexpr int kWin = 11;
  constexpr int kRad = kWin / 2;
  if (h < kWin || w < kWin) throw std::invalid_argument("ssim: images smaller than the window");

  bool identical = true;
  for (std::size_t i = 0; i < ga.numel() && identical; ++i) identical = ga[i] == gb[i];
  if (identical) return 1.0;

  static const std::vector<double> window = [] {
    std::vector<double> win(kWin * kWin);
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i) {
      for (int j = 0; j < kWin; ++j) {
        const double di = i - kRad, dj = j - kRad;
        win[i * kWin + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
        sum += win[i * kWin + j];
      }
    }
    for (double& v : win) v /= sum;
    return win;
  }();

  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  double acc = 0.0;
  int count = 0;
  for (int r = kRad; r < h - kRad; ++r) {
    for (int c = kRad; c < w - kRad; ++c) {
      double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
      for (int i = 0; i < kWin; ++i) {
        for (int j = 0; j < kWin; ++j) {
          const double wij = window[i * kWin + j];
          const double va = ga.at(r + i - kRad, c + j - kRad);
          const double vb = gb.at(r + i - kRad, c + j - kRad);
          mu_a += wij * va;
          mu_b += wij * vb;
          aa += wij * va * va;
          bb += wij * vb * vb;
          ab += wij * va * vb;
        }
      }
      const double pa = mu_a * mu_a;
      const double pb = mu_b * mu_b;
      const double pab = mu_a * mu_b;
      const double var_a = aa - pa;
      const double var_b = bb - pb;
      const double cov = ab - pab;
      const double num = (2.0 * pab + c1) * (2.0 * cov + c2);
      const double den = (pa + pb + c1) * (var_a + var_b + c2);
      acc += num / den;
      ++count;
    }
  }
  return acc / count;
}

double perceptual_distance(const core::Tensor& a, const core::Tensor& b,
                           const selftrain::PerceptualBackend* backend) {
  if (backend == nullptr) {
    throw std::runtime_error("perceptual backend not configured");
  }
  check_shapes(a, b, "perceptual_distance");
  return backend->distance_plain(a, b);
}

}  // namespace svr::evalharness
