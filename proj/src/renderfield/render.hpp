#pragma once

#include <array>
#include <memory>
#include <vector>

#include "ad/ops.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"
#include "geometry/pose.hpp"

namespace svr::renderfield {

// Latent representation: three axis-aligned feature planes (xy, xz, yz).
struct Triplane {
  core::Tensor planes;  // (3, h, w, c)
  int resolution() const { return planes.dim(1); }
  int channels() const { return planes.dim(3); }
};

// Small MLP mapping a summed plane feature to (density, rgb). Density goes
// through a shifted softplus (shift keeps freshly initialized fields nearly
// transparent), color through a sigmoid.
struct FieldDecoder {
  std::vector<core::Tensor> weights;  // (in, out) per layer
  std::vector<core::Tensor> biases;   // (out) per layer
  static constexpr double kDensityShift = 3.0;

  static FieldDecoder init(int channels, int hidden, int hidden_layers, core::Rng& rng);
  int in_channels() const { return weights.front().dim(0); }
};

struct RenderedView {
  core::Tensor rgb;    // (H, W, 3)
  core::Tensor alpha;  // (H, W)
  geometry::CameraPose pose;
};

enum class DepthSampling { midpoint, stratified };

struct RenderSettings {
  int resolution = 128;
  int samples_per_ray = 128;
  double near = 0.0, far = 0.0;  // both zero: derive from the pose's orbit radius
  DepthSampling sampling = DepthSampling::midpoint;
};

constexpr std::array<double, 3> kGray = {0.5, 0.5, 0.5};

// Depth samples for every pixel of a pose at the given settings. Stratified
// sampling consumes resolution^2 * samples_per_ray uniforms from rng in
// row-major ray order. Returns (R*S, 3) points and the constant step delta.
struct SamplePoints {
  std::shared_ptr<const core::Tensor> points;
  double delta = 0.0;
  int n_rays = 0, n_samples = 0;
};
SamplePoints make_sample_points(const geometry::CameraPose& pose, const RenderSettings& s,
                                core::Rng* strat_rng);

// Differentiable render on the tape. planes is a (3,h,w,c) var; decoder vars
// are bound tensors of a FieldDecoder. Returns the (R,4) rgb+alpha var.
struct DecoderVars {
  std::vector<ad::Var> weights, biases;
};
ad::Var render(ad::Tape& t, ad::Var planes, const DecoderVars& dec,
               const geometry::CameraPose& pose, const RenderSettings& s,
               core::Rng* strat_rng);

// Same computation without a tape (no gradients); used for candidate views,
// evaluation and data generation.
RenderedView render_plain(const Triplane& tri, const FieldDecoder& dec,
                          const geometry::CameraPose& pose, const RenderSettings& s,
                          core::Rng* strat_rng);

// Analytic density/color field interface (ground-truth shapes).
class DensityColorField {
public:
  virtual ~DensityColorField() = default;
  virtual void eval(const double* points, int n, double* sigma, double* rgb) const = 0;
};

RenderedView render_field(const DensityColorField& field, const geometry::CameraPose& pose,
                          const RenderSettings& s);

// Depth companion of render_field: expected ray-termination distance, plus the
// same alpha; used to derive inverse-depth maps for curation scenes.
void render_field_depth(const DensityColorField& field, const geometry::CameraPose& pose,
                        const RenderSettings& s, core::Tensor& depth, core::Tensor& alpha);

// out = rgb + (1 - alpha) * color, elementwise over pixels.
core::Tensor composite_background(const RenderedView& view, const std::array<double, 3>& color);
// Tape variant over an (R,4) rgba var -> (R,3).
ad::Var composite_background(ad::Tape& t, ad::Var rgba, const std::array<double, 3>& color);

// Convert an (R,4) rgba tensor into a RenderedView.
RenderedView split_rgba(const core::Tensor& rgba, int resolution,
                        const geometry::CameraPose& pose);

// Plain decoder forward: feats (P,c) -> sigma (P), rgb (P,3).
void decode_plain(const FieldDecoder& dec, const core::Tensor& feats, core::Tensor& sigma,
                  core::Tensor& rgb);

}  // namespace svr::renderfield
