#pragma once

#include <string>

#include "core/tensor.hpp"

namespace svr::core {

// PNG I/O. Values are mapped between [0, 1] doubles and the integer sample
// range of the file (8-bit for color and masks, 16-bit for depth-like data).

void write_png_rgb(const std::string& path, const Tensor& img);     // (H,W,3)
Tensor read_png_rgb(const std::string& path);                       // -> (H,W,3)

void write_png_gray8(const std::string& path, const Tensor& img);   // (H,W)
void write_png_gray16(const std::string& path, const Tensor& img);  // (H,W)
Tensor read_png_gray(const std::string& path);                      // -> (H,W), any depth

}  // namespace svr::core
