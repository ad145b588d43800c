#include "renderfield/render.hpp"

#include <cmath>
#include <stdexcept>

#include "core/kernels.hpp"

namespace svr::renderfield {

using core::Rng;
using core::Tensor;
using geometry::CameraPose;
using geometry::RayBundle;

namespace {

void resolve_bounds(const CameraPose& pose, const RenderSettings& s, double& near, double& far) {
  near = s.near;
  far = s.far;
  if (near == 0.0 && far == 0.0) {
    const double radius = pose.translation.norm();
    near = geometry::default_near(radius);
    far = geometry::default_far(radius);
  }
  if (!(near > 0.0 && near < far))
    throw std::invalid_argument("render: need 0 < near < far");
}

double gelu_scalar(double x) { return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865476)); }

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_scalar(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

}  // namespace

FieldDecoder FieldDecoder::init(int channels, int hidden, int hidden_layers, Rng& rng) {
  if (channels < 1 || hidden < 1 || hidden_layers < 1)
    throw std::invalid_argument("FieldDecoder::init: bad sizes");
  FieldDecoder d;
  int in = channels;
  for (int l = 0; l <= hidden_layers; ++l) {
    const int out = l == hidden_layers ? 4 : hidden;
    Tensor w({in, out});
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(in));
    for (size_t i = 0; i < w.numel(); ++i) w[i] = rng.normal() * std_dev;
    d.weights.push_back(std::move(w));
    d.biases.push_back(Tensor({out}));
    in = out;
  }
  return d;
}

SamplePoints make_sample_points(const CameraPose& pose, const RenderSettings& s,
                                Rng* strat_rng) {
  if (s.samples_per_ray < 2)
    throw std::invalid_argument("render: samples_per_ray must be >= 2");
  double near, far;
  resolve_bounds(pose, s, near, far);
  const RayBundle rays = geometry::camera_rays(pose, s.resolution, near, far);
  const int n_rays = s.resolution * s.resolution;
  const int n_samples = s.samples_per_ray;
  const double delta = (far - near) / n_samples;

  auto pts = std::make_shared<Tensor>(std::vector<int>{n_rays * n_samples, 3});
  double* p = pts->data();
  const bool stratified = s.sampling == DepthSampling::stratified && strat_rng != nullptr;
  for (int r = 0; r < n_rays; ++r) {
    const geometry::Vec3 o = rays.origins[static_cast<size_t>(r)];
    const geometry::Vec3 d = rays.directions[static_cast<size_t>(r)];
    for (int k = 0; k < n_samples; ++k) {
      const double off = stratified ? strat_rng->uniform() : 0.5;
      const double t = near + (k + off) * delta;
      const size_t idx = (static_cast<size_t>(r) * n_samples + k) * 3;
      p[idx] = o.x + t * d.x;
      p[idx + 1] = o.y + t * d.y;
      p[idx + 2] = o.z + t * d.z;
    }
  }
  return {pts, delta, n_rays, n_samples};
}

ad::Var render(ad::Tape& t, ad::Var planes, const DecoderVars& dec, const CameraPose& pose,
               const RenderSettings& s, Rng* strat_rng) {
  const SamplePoints sp = make_sample_points(pose, s, strat_rng);
  ad::Var h = ad::triplane_sample(t, planes, sp.points);
  const size_t n_layers = dec.weights.size();
  for (size_t l = 0; l + 1 < n_layers; ++l)
    h = ad::gelu(t, ad::linear(t, h, dec.weights[l], dec.biases[l]));
  ad::Var raw = ad::linear(t, h, dec.weights[n_layers - 1], dec.biases[n_layers - 1]);
  ad::Var sigma = ad::softplus(
      t, ad::add_scalar(t, ad::slice_cols(t, raw, 0, 1), -FieldDecoder::kDensityShift));
  ad::Var rgb = ad::sigmoid(t, ad::slice_cols(t, raw, 1, 3));
  return ad::composite_rays(t, sigma, rgb, sp.n_rays, sp.n_samples, sp.delta);
}

void decode_plain(const FieldDecoder& dec, const Tensor& feats, Tensor& sigma, Tensor& rgb) {
  const int p = feats.dim(0);
  Tensor h = feats;
  for (size_t l = 0; l < dec.weights.size(); ++l) {
    const Tensor& w = dec.weights[l];
    const Tensor& b = dec.biases[l];
    Tensor out({p, w.dim(1)});
    kernels::gemm(h.data(), w.data(), out.data(), p, w.dim(0), w.dim(1), false, false, 0.0);
    const bool last = l + 1 == dec.weights.size();
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < w.dim(1); ++j) {
        double v = out.at(i, j) + b[static_cast<size_t>(j)];
        if (!last) v = gelu_scalar(v);
        out.at(i, j) = v;
      }
    h = std::move(out);
  }
  sigma = Tensor({p});
  rgb = Tensor({p, 3});
  for (int i = 0; i < p; ++i) {
    sigma[static_cast<size_t>(i)] =
        softplus_scalar(h.at(i, 0) - FieldDecoder::kDensityShift);
    for (int c = 0; c < 3; ++c) rgb.at(i, c) = sigmoid_scalar(h.at(i, c + 1));
  }
}

RenderedView split_rgba(const Tensor& rgba, int resolution, const CameraPose& pose) {
  RenderedView v;
  v.pose = pose;
  v.rgb = Tensor({resolution, resolution, 3});
  v.alpha = Tensor({resolution, resolution});
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j) {
      const int r = i * resolution + j;
      for (int c = 0; c < 3; ++c) v.rgb.at(i, j, c) = rgba.at(r, c);
      v.alpha.at(i, j) = rgba.at(r, 3);
    }
  return v;
}

RenderedView render_plain(const Triplane& tri, const FieldDecoder& dec, const CameraPose& pose,
                          const RenderSettings& s, Rng* strat_rng) {
  const SamplePoints sp = make_sample_points(pose, s, strat_rng);
  const Tensor& planes = tri.planes;
  Tensor feats({sp.n_rays * sp.n_samples, planes.dim(3)});
  kernels::triplane_gather(planes.data(), planes.dim(1), planes.dim(2), planes.dim(3),
                           sp.points->data(), sp.n_rays * sp.n_samples, feats.data());
  Tensor sigma, rgb;
  decode_plain(dec, feats, sigma, rgb);
  Tensor rgba({sp.n_rays, 4});
  kernels::composite_forward(sigma.data(), rgb.data(), sp.n_rays, sp.n_samples, sp.delta,
                             rgba.data());
  return split_rgba(rgba, s.resolution, pose);
}

RenderedView render_field(const DensityColorField& field, const CameraPose& pose,
                          const RenderSettings& s) {
  const SamplePoints sp = make_sample_points(pose, s, nullptr);
  const int p = sp.n_rays * sp.n_samples;
  Tensor sigma({p});
  Tensor rgb({p, 3});
  field.eval(sp.points->data(), p, sigma.data(), rgb.data());
  Tensor rgba({sp.n_rays, 4});
  kernels::composite_forward(sigma.data(), rgb.data(), sp.n_rays, sp.n_samples, sp.delta,
                             rgba.data());
  return split_rgba(rgba, s.resolution, pose);
}

void render_field_depth(const DensityColorField& field, const CameraPose& pose,
                        const RenderSettings& s, Tensor& depth, Tensor& alpha) {
  double near, far;
  resolve_bounds(pose, s, near, far);
  const SamplePoints sp = make_sample_points(pose, s, nullptr);
  const int p = sp.n_rays * sp.n_samples;
  Tensor sigma({p});
  Tensor rgb({p, 3});
  field.eval(sp.points->data(), p, sigma.data(), rgb.data());

  depth = Tensor({s.resolution, s.resolution});
  alpha = Tensor({s.resolution, s.resolution});
  for (int r = 0; r < sp.n_rays; ++r) {
    double trans = 1.0, d_acc = 0.0;
    for (int k = 0; k < sp.n_samples; ++k) {
      const double a = 1.0 - std::exp(-sigma[static_cast<size_t>(r) * sp.n_samples + k] * sp.delta);
      const double w = trans * a;
      const double t = near + (k + 0.5) * sp.delta;
      d_acc += w * t;
      trans *= 1.0 - a;
    }
    const double a_total = 1.0 - trans;
    // Fill the unterminated remainder with the far plane so empty pixels read
    // as maximally distant.
    depth[static_cast<size_t>(r)] = d_acc + trans * far;
    alpha[static_cast<size_t>(r)] = a_total;
  }
}

Tensor composite_background(const RenderedView& view, const std::array<double, 3>& color) {
  const int h = view.rgb.dim(0), w = view.rgb.dim(1);
  Tensor out({h, w, 3});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      const double a = view.alpha.at(i, j);
      for (int c = 0; c < 3; ++c)
        out.at(i, j, c) = view.rgb.at(i, j, c) + (1.0 - a) * color[static_cast<size_t>(c)];
    }
  return out;
}

ad::Var composite_background(ad::Tape& t, ad::Var rgba, const std::array<double, 3>& color) {
  return ad::composite_over(t, rgba, color);
}

}  // namespace svr::renderfield
