#pragma once

#include <string>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace svr::dataworld {

// Square instance crop with the background flattened to gray.
struct InstanceRecord {
  core::Tensor image;  // (R, R, 3)
  std::string source_id;
  double expand_ratio = 0.0;
};

constexpr double kEvalExpandRatio = 1.6;
constexpr double kTrainExpandMin = 1.45;
constexpr double kTrainExpandMax = 1.7;
constexpr double kBackgroundGray = 0.5;

double sample_train_expand_ratio(core::Rng& rng);

// Crop a square window of side expand_ratio x (longer bbox side) centered on
// the mask's bounding box; pixels outside the mask or the image become gray;
// the result is resized to output_resolution.
InstanceRecord crop_instance(const core::Tensor& image, const core::Tensor& mask,
                             double expand_ratio, int output_resolution,
                             double background_gray = kBackgroundGray);

}  // namespace svr::dataworld
