#pragma once

#include <cstdint>
#include <vector>

#include "core/rng.hpp"
#include "renderfield/render.hpp"

namespace svr::dataworld {

// Distribution knobs for procedural shapes. The exponent controls roundness
// (2 = ellipsoid, large = box-like, < 1 = spiky octahedroid), so shifting its
// range between dataset families creates a controlled shape-distribution gap.
struct ShapeParams {
  double exponent_min = 1.8;
  double exponent_max = 4.0;
  int max_parts = 4;
};

// One superquadric lobe of a compound shape, axis aligned.
struct ShapePart {
  double center[3];
  double half_axes[3];
  double exponent;
  double color_a[3];
  double color_b[3];
  bool two_tone = false;
  int split_axis = 0;
};

// Analytic density+color field: a compound of 1-4 superquadrics, normalized
// so the whole compound lies inside [-kCubeHalf, kCubeHalf]^3 and at least one
// part touches the visibility ball around the origin.
class ToyShape : public renderfield::DensityColorField {
public:
  static constexpr double kCubeHalf = 0.87;
  static constexpr double kVisibilityRadius = 0.3;

  void eval(const double* points, int n, double* sigma, double* rgb) const override;

  const std::vector<ShapePart>& parts() const { return parts_; }
  uint64_t seed() const { return seed_; }

private:
  friend ToyShape generate_shape(uint64_t seed, const ShapeParams& params);
  std::vector<ShapePart> parts_;
  uint64_t seed_ = 0;
};

// Deterministic shape from a seed. Redraws internally until the visibility
// contract holds.
ToyShape generate_shape(uint64_t seed, const ShapeParams& params = {});

// Ground-truth views of the analytic field (rgb premultiplied, alpha mask).
std::vector<renderfield::RenderedView> render_shape_views(
    const ToyShape& shape, const std::vector<geometry::CameraPose>& poses,
    const renderfield::RenderSettings& settings);

}  // namespace svr::dataworld
