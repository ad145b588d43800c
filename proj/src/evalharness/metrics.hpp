#pragma once

#include "core/tensor.hpp"
#include "selftrain/perceptual.hpp"

namespace svr::evalharness {

// Peak signal-to-noise ratio in dB over all channels, capped at 99 dB for
// near-identical images so aggregation stays finite.
double psnr(const core::Tensor& a, const core::Tensor& b);

constexpr double kPsnrCap = 99.0;

// Mean local structural similarity with an 11x11 Gaussian window (sigma 1.5)
// and the standard stabilization constants; color images are compared on luma.
double ssim(const core::Tensor& a, const core::Tensor& b);

// Feature-space distance through the given backend; null backend is a
// configuration error.
double perceptual_distance(const core::Tensor& a, const core::Tensor& b,
                           const selftrain::PerceptualBackend* backend);

}  // namespace svr::evalharness
