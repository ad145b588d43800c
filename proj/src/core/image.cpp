#include "core/image.hpp"

#include <stdexcept>

namespace svr::core {

namespace {

int channels_of(const Tensor& img) {
  if (img.rank() == 2) return 1;
  if (img.rank() == 3) return img.dim(2);
  throw std::invalid_argument("image tensor must be (H,W) or (H,W,C)");
}

int clampi(int v, int lo, int hi) { return std::clamp(v, lo, hi); }

}  // namespace

Tensor resize_bilinear(const Tensor& img, int out_h, int out_w) {
  const int h = img.dim(0), w = img.dim(1), c = channels_of(img);
  std::vector<int> out_shape = img.rank() == 2 ? std::vector<int>{out_h, out_w}
                                               : std::vector<int>{out_h, out_w, c};
  Tensor out(out_shape);
  const double* src = img.data();
  double* dst = out.data();
  for (int i = 0; i < out_h; ++i) {
    const ResizeTap ty = resize_tap(i, h, out_h);
    for (int j = 0; j < out_w; ++j) {
      const ResizeTap tx = resize_tap(j, w, out_w);
      for (int ch = 0; ch < c; ++ch) {
        const double v00 = src[(static_cast<size_t>(ty.i0) * w + tx.i0) * c + ch];
        const double v01 = src[(static_cast<size_t>(ty.i0) * w + tx.i1) * c + ch];
        const double v10 = src[(static_cast<size_t>(ty.i1) * w + tx.i0) * c + ch];
        const double v11 = src[(static_cast<size_t>(ty.i1) * w + tx.i1) * c + ch];
        const double top = v00 + tx.f * (v01 - v00);
        const double bot = v10 + tx.f * (v11 - v10);
        dst[(static_cast<size_t>(i) * out_w + j) * c + ch] = top + ty.f * (bot - top);
      }
    }
  }
  return out;
}

Tensor to_gray(const Tensor& rgb) {
  if (rgb.rank() != 3 || rgb.dim(2) != 3)
    throw std::invalid_argument("to_gray expects an (H,W,3) image");
  const int h = rgb.dim(0), w = rgb.dim(1);
  Tensor out({h, w});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const double r = rgb.at(i, j, 0), g = rgb.at(i, j, 1), b = rgb.at(i, j, 2);
      out.at(i, j) = 0.299 * r + 0.587 * g + 0.114 * b;
    }
  return out;
}

Tensor box_blur3(const Tensor& img) {
  if (img.rank() != 2) throw std::invalid_argument("box_blur3 expects (H,W)");
  const int h = img.dim(0), w = img.dim(1);
  Tensor out({h, w});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      double s = 0.0;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          s += img.at(clampi(i + di, 0, h - 1), clampi(j + dj, 0, w - 1));
      out.at(i, j) = s / 9.0;
    }
  return out;
}

void sobel(const Tensor& img, Tensor& gx, Tensor& gy) {
  if (img.rank() != 2) throw std::invalid_argument("sobel expects (H,W)");
  const int h = img.dim(0), w = img.dim(1);
  gx = Tensor({h, w});
  gy = Tensor({h, w});
  auto px = [&](int i, int j) { return img.at(clampi(i, 0, h - 1), clampi(j, 0, w - 1)); };
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      gx.at(i, j) = (px(i - 1, j + 1) + 2.0 * px(i, j + 1) + px(i + 1, j + 1)) -
                    (px(i - 1, j - 1) + 2.0 * px(i, j - 1) + px(i + 1, j - 1));
      gy.at(i, j) = (px(i + 1, j - 1) + 2.0 * px(i + 1, j) + px(i + 1, j + 1)) -
                    (px(i - 1, j - 1) + 2.0 * px(i - 1, j) + px(i - 1, j + 1));
    }
}

Tensor erode(const Tensor& mask, int k) {
  if (mask.rank() != 2) throw std::invalid_argument("erode expects (H,W)");
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("erode: kernel must be odd and positive");
  const int h = mask.dim(0), w = mask.dim(1), r = k / 2;
  Tensor out({h, w});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      bool all = true;
      for (int di = -r; di <= r && all; ++di)
        for (int dj = -r; dj <= r; ++dj) {
          const int ii = i + di, jj = j + dj;
          const bool on = ii >= 0 && ii < h && jj >= 0 && jj < w && mask.at(ii, jj) > 0.5;
          if (!on) {
            all = false;
            break;
          }
        }
      out.at(i, j) = all ? 1.0 : 0.0;
    }
  return out;
}

Tensor dilate(const Tensor& mask, int k) {
  if (mask.rank() != 2) throw std::invalid_argument("dilate expects (H,W)");
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("dilate: kernel must be odd and positive");
  const int h = mask.dim(0), w = mask.dim(1), r = k / 2;
  Tensor out({h, w});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      bool any = false;
      for (int di = -r; di <= r && !any; ++di)
        for (int dj = -r; dj <= r; ++dj) {
          const int ii = i + di, jj = j + dj;
          if (ii >= 0 && ii < h && jj >= 0 && jj < w && mask.at(ii, jj) > 0.5) {
            any = true;
            break;
          }
        }
      out.at(i, j) = any ? 1.0 : 0.0;
    }
  return out;
}

bool mask_bbox(const Tensor& mask, Box& out) {
  if (mask.rank() != 2) throw std::invalid_argument("mask_bbox expects (H,W)");
  const int h = mask.dim(0), w = mask.dim(1);
  int x0 = w, y0 = h, x1 = -1, y1 = -1;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      if (mask.at(i, j) > 0.5) {
        x0 = std::min(x0, j);
        x1 = std::max(x1, j);
        y0 = std::min(y0, i);
        y1 = std::max(y1, i);
      }
  if (x1 < 0) return false;
  out = {x0, y0, x1, y1};
  return true;
}

Tensor crop_region(const Tensor& img, int x0, int y0, int out_w, int out_h,
                   double pad_value) {
  const int h = img.dim(0), w = img.dim(1), c = channels_of(img);
  std::vector<int> out_shape = img.rank() == 2 ? std::vector<int>{out_h, out_w}
                                               : std::vector<int>{out_h, out_w, c};
  Tensor out(out_shape, pad_value);
  for (int i = 0; i < out_h; ++i) {
    const int si = y0 + i;
    if (si < 0 || si >= h) continue;
    for (int j = 0; j < out_w; ++j) {
      const int sj = x0 + j;
      if (sj < 0 || sj >= w) continue;
      for (int ch = 0; ch < c; ++ch)
        out.data()[(static_cast<size_t>(i) * out_w + j) * c + ch] =
            img.data()[(static_cast<size_t>(si) * w + sj) * c + ch];
    }
  }
  return out;
}

}  // namespace svr::core
