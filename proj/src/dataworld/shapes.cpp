#include "dataworld/shapes.hpp"

#include <algorithm>
#include <cmath>

namespace svr::dataworld {

namespace {

constexpr double kDensityMax = 40.0;
constexpr double kSurfaceSharpness = 14.0;
constexpr uint64_t kShapeTag = 0x7368617065;

// Superquadric inside-outside value: < 1 inside, 1 on the surface.
double part_level(const ShapePart& p, double x, double y, double z) {
  const double dx = std::abs(x - p.center[0]) / p.half_axes[0];
  const double dy = std::abs(y - p.center[1]) / p.half_axes[1];
  const double dz = std::abs(z - p.center[2]) / p.half_axes[2];
  return std::pow(dx, p.exponent) + std::pow(dy, p.exponent) + std::pow(dz, p.exponent);
}

double part_density(const ShapePart& p, double x, double y, double z) {
  const double f = part_level(p, x, y, z);
  return kDensityMax / (1.0 + std::exp(kSurfaceSharpness * (f - 1.0)));
}

// Distance from the origin to the part's bounding box.
double box_distance_to_origin(const ShapePart& p) {
  double sq = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double d = std::max(std::abs(p.center[a]) - p.half_axes[a], 0.0);
    sq += d * d;
  }
  return std::sqrt(sq);
}

std::vector<ShapePart> draw_parts(core::Rng& rng, const ShapeParams& params) {
  const int n = 1 + rng.uniform_int(params.max_parts);
  std::vector<ShapePart> parts(static_cast<size_t>(n));
  for (ShapePart& p : parts) {
    for (int a = 0; a < 3; ++a) p.center[a] = rng.uniform(-0.5, 0.5);
    for (int a = 0; a < 3; ++a) p.half_axes[a] = rng.uniform(0.15, 0.55);
    p.exponent = rng.uniform(params.exponent_min, params.exponent_max);
    for (int a = 0; a < 3; ++a) p.color_a[a] = rng.uniform(0.15, 0.95);
    for (int a = 0; a < 3; ++a) p.color_b[a] = rng.uniform(0.15, 0.95);
    p.two_tone = rng.uniform() < 0.5;
    p.split_axis = rng.uniform_int(3);
  }
  return parts;
}

// Center the compound and scale it to the target half-extent, which stays
// well inside the working cube so the canonical camera frames the whole shape.
void normalize_parts(std::vector<ShapePart>& parts, double target_extent) {
  double lo[3] = {1e30, 1e30, 1e30}, hi[3] = {-1e30, -1e30, -1e30};
  for (const ShapePart& p : parts)
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p.center[a] - p.half_axes[a]);
      hi[a] = std::max(hi[a], p.center[a] + p.half_axes[a]);
    }
  double mid[3], extent = 0.0;
  for (int a = 0; a < 3; ++a) {
    mid[a] = 0.5 * (lo[a] + hi[a]);
    extent = std::max(extent, 0.5 * (hi[a] - lo[a]));
  }
  const double scale = target_extent / extent;
  for (ShapePart& p : parts)
    for (int a = 0; a < 3; ++a) {
      p.center[a] = (p.center[a] - mid[a]) * scale;
      p.half_axes[a] *= scale;
    }
}

}  // namespace

ToyShape generate_shape(uint64_t seed, const ShapeParams& params) {
  ToyShape shape;
  shape.seed_ = seed;
  for (uint64_t attempt = 0;; ++attempt) {
    core::Rng rng(core::mix64(seed, kShapeTag, attempt));
    std::vector<ShapePart> parts = draw_parts(rng, params);
    normalize_parts(parts, rng.uniform(0.30, 0.50));
    const bool visible = std::any_of(parts.begin(), parts.end(), [](const ShapePart& p) {
      return box_distance_to_origin(p) <= ToyShape::kVisibilityRadius;
    });
    if (visible) {
      shape.parts_ = std::move(parts);
      return shape;
    }
  }
}

void ToyShape::eval(const double* points, int n, double* sigma, double* rgb) const {
  for (int i = 0; i < n; ++i) {
    const double x = points[3 * i], y = points[3 * i + 1], z = points[3 * i + 2];
    double best = 0.0;
    const ShapePart* owner = nullptr;
    if (std::abs(x) <= kCubeHalf && std::abs(y) <= kCubeHalf && std::abs(z) <= kCubeHalf) {
      for (const ShapePart& p : parts_) {
        const double d = part_density(p, x, y, z);
        if (d > best) {
          best = d;
          owner = &p;
        }
      }
    }
    sigma[i] = best;
    if (owner != nullptr) {
      const double local[3] = {x - owner->center[0], y - owner->center[1], z - owner->center[2]};
      const double* c =
          (owner->two_tone && local[owner->split_axis] < 0.0) ? owner->color_b : owner->color_a;
      for (int a = 0; a < 3; ++a) rgb[3 * i + a] = c[a];
    } else {
      for (int a = 0; a < 3; ++a) rgb[3 * i + a] = 0.0;
    }
  }
}

std::vector<renderfield::RenderedView> render_shape_views(
    const ToyShape& shape, const std::vector<geometry::CameraPose>& poses,
    const renderfield::RenderSettings& settings) {
  std::vector<renderfield::RenderedView> views;
  views.reserve(poses.size());
  for (const geometry::CameraPose& pose : poses)
    views.push_back(renderfield::render_field(shape, pose, settings));
  return views;
}

}  // namespace svr::dataworld
