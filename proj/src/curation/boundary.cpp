#include "curation/boundary.hpp"

#include <cmath>
#include <stdexcept>

#include "core/image.hpp"

namespace svr::curation {

namespace {

constexpr int kErodeKernel = 9;
constexpr int kDilateKernel = 15;

void check_mask(const core::Tensor& mask) {
  if (mask.shape().size() != 2) throw std::invalid_argument("mask must be (H,W)");
}

}  // namespace

core::Tensor instance_boundary(const core::Tensor& mask) {
  check_mask(mask);
  core::Tensor eroded = core::erode(mask, kErodeKernel);
  core::Tensor band(mask.shape());
  for (std::size_t i = 0; i < mask.numel(); ++i) {
    band[i] = (mask[i] > 0.5 && eroded[i] <= 0.5) ? 1.0 : 0.0;
  }
  return band;
}

core::Tensor contact_boundary(const core::Tensor& boundary,
                              const std::vector<core::Tensor>& other_boundaries) {
  check_mask(boundary);
  core::Tensor contact(boundary.shape());
  if (other_boundaries.empty()) return contact;
  core::Tensor merged(boundary.shape());
  for (const core::Tensor& other : other_boundaries) {
    if (other.shape() != boundary.shape()) {
      throw std::invalid_argument("boundary shape mismatch");
    }
    for (std::size_t i = 0; i < merged.numel(); ++i) {
      if (other[i] > 0.5) merged[i] = 1.0;
    }
  }
  core::Tensor reach = core::dilate(merged, kDilateKernel);
  for (std::size_t i = 0; i < contact.numel(); ++i) {
    contact[i] = (boundary[i] > 0.5 && reach[i] > 0.5) ? 1.0 : 0.0;
  }
  return contact;
}

NormalField make_normal_field(const core::Tensor& mask) {
  check_mask(mask);
  NormalField field;
  field.mask = &mask;
  core::Tensor smooth = core::box_blur3(mask);
  core::sobel(smooth, field.gx, field.gy);
  return field;
}

NormalStatus query_normal(const NormalField& field, int row, int col, BoundaryNormal& out) {
  const core::Tensor& mask = *field.mask;
  const int h = static_cast<int>(mask.shape()[0]);
  const int w = static_cast<int>(mask.shape()[1]);
  if (row < 0 || row >= h || col < 0 || col >= w) {
    throw std::out_of_range("normal query outside mask");
  }
  auto inside = [&](int r, int c) {
    if (r < 0 || r >= h || c < 0 || c >= w) return false;
    return mask.at(r, c) > 0.5;
  };
  bool all_inside = true;
  for (int dr = -1; dr <= 1 && all_inside; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      if (!inside(row + dr, col + dc)) {
        all_inside = false;
        break;
      }
    }
  }
  if (all_inside) return NormalStatus::interior;

  const double gx = field.gx.at(row, col);
  const double gy = field.gy.at(row, col);
  const double norm = std::sqrt(gx * gx + gy * gy);
  if (norm < 1e-9) return NormalStatus::degenerate;

  // The smoothed mask increases toward the interior, so the outward guess
  // points against the gradient.
  double nx = -gx / norm;
  double ny = -gy / norm;

  auto probe = [&](double sign) {
    int r = row + static_cast<int>(std::lround(sign * 2.0 * ny));
    int c = col + static_cast<int>(std::lround(sign * 2.0 * nx));
    r = std::min(std::max(r, 0), h - 1);
    c = std::min(std::max(c, 0), w - 1);
    return mask.at(r, c) > 0.5;
  };
  const bool forward_inside = probe(1.0);
  const bool backward_inside = probe(-1.0);
  if (forward_inside == backward_inside) return NormalStatus::ambiguous;
  if (forward_inside) {
    nx = -nx;
    ny = -ny;
  }
  out.nx = nx;
  out.ny = ny;
  return NormalStatus::ok;
}

NormalStatus boundary_normal(const core::Tensor& mask, int row, int col, BoundaryNormal& out) {
  NormalField field = make_normal_field(mask);
  return query_normal(field, row, col, out);
}

}  // namespace svr::curation
