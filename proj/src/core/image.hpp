#pragma once

#include <algorithm>
#include <cmath>

#include "core/tensor.hpp"

namespace svr::core {

// Image helpers on plain tensors. Color images are (H, W, 3), single-channel
// images and masks are (H, W); values live in [0, 1] unless stated otherwise.

// Half-pixel-center bilinear tap: source footprint of output index `oi` when
// resizing a length `in_n` axis to `out_n`. Shared with the autodiff resize op
// so forward and adjoint use the same weights.
struct ResizeTap {
  int i0, i1;
  double f;  // weight of i1; (1 - f) goes to i0
};

inline ResizeTap resize_tap(int oi, int in_n, int out_n) {
  double s = (oi + 0.5) * static_cast<double>(in_n) / out_n - 0.5;
  s = std::clamp(s, 0.0, static_cast<double>(in_n - 1));
  int i0 = static_cast<int>(std::floor(s));
  i0 = std::min(i0, in_n - 1);
  const int i1 = std::min(i0 + 1, in_n - 1);
  return {i0, i1, s - i0};
}

Tensor resize_bilinear(const Tensor& img, int out_h, int out_w);

// Rec. 601 luma from an (H, W, 3) image.
Tensor to_gray(const Tensor& rgb);

// 3x3 box blur with replicated borders, single channel.
Tensor box_blur3(const Tensor& img);

// 3x3 Sobel derivatives with replicated borders. gx is the horizontal
// derivative (increasing column), gy vertical (increasing row).
void sobel(const Tensor& img, Tensor& gx, Tensor& gy);

// Binary morphology with a square k x k structuring element (k odd).
// Pixels outside the image count as background.
Tensor erode(const Tensor& mask, int k);
Tensor dilate(const Tensor& mask, int k);

// Axis-aligned bounding box of mask pixels > 0.5. Returns false if empty.
struct Box {
  int x0, y0, x1, y1;  // inclusive
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
};
bool mask_bbox(const Tensor& mask, Box& out);

// Copy a region (may extend past the image) into a new image, filling
// out-of-image pixels with pad_value. Works for (H, W) and (H, W, C).
Tensor crop_region(const Tensor& img, int x0, int y0, int out_w, int out_h,
                   double pad_value);

}  // namespace svr::core
