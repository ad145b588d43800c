#include "dataworld/crop.hpp"

#include <cmath>
#include <stdexcept>

#include "core/image.hpp"

namespace svr::dataworld {

using core::Tensor;

double sample_train_expand_ratio(core::Rng& rng) {
  return rng.uniform(kTrainExpandMin, kTrainExpandMax);
}

InstanceRecord crop_instance(const Tensor& image, const Tensor& mask, double expand_ratio,
                             int output_resolution, double background_gray) {
  if (image.rank() != 3 || image.dim(2) != 3 || mask.rank() != 2 ||
      mask.dim(0) != image.dim(0) || mask.dim(1) != image.dim(1))
    throw std::invalid_argument("crop_instance: need an (H,W,3) image with a matching mask");
  if (expand_ratio < 1.0) throw std::invalid_argument("crop_instance: expand ratio must be >= 1");
  if (output_resolution < 1) throw std::invalid_argument("crop_instance: bad output resolution");
  core::Box box;
  if (!core::mask_bbox(mask, box)) throw std::invalid_argument("crop_instance: empty mask");

  const int h = image.dim(0), w = image.dim(1);
  Tensor flattened({h, w, 3});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const bool fg = mask.at(i, j) > 0.5;
      for (int c = 0; c < 3; ++c)
        flattened.at(i, j, c) = fg ? image.at(i, j, c) : background_gray;
    }

  const int longer = std::max(box.width(), box.height());
  const int side = static_cast<int>(std::lround(expand_ratio * longer));
  const double cx = 0.5 * (box.x0 + box.x1 + 1);
  const double cy = 0.5 * (box.y0 + box.y1 + 1);
  const int x0 = static_cast<int>(std::lround(cx - 0.5 * side));
  const int y0 = static_cast<int>(std::lround(cy - 0.5 * side));

  Tensor crop = core::crop_region(flattened, x0, y0, side, side, background_gray);
  InstanceRecord rec;
  rec.image = (side == output_resolution)
                  ? crop
                  : core::resize_bilinear(crop, output_resolution, output_resolution);
  rec.expand_ratio = expand_ratio;
  return rec;
}

}  // namespace svr::dataworld
