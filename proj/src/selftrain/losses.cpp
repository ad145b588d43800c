#include "selftrain/losses.hpp"

#include <stdexcept>

#include "core/image.hpp"

namespace svr::selftrain {

using ad::Tape;
using ad::Var;
using core::Rng;
using core::Tensor;
using geometry::CameraPose;
using reconstructor::BoundParams;
using renderfield::DecoderVars;
using renderfield::RenderSettings;

namespace {

Tensor resize_to(const Tensor& img, int res) {
  if (img.dim(0) == res && img.dim(1) == res) return img;
  return core::resize_bilinear(img, res, res);
}

CurriculumState effective_state(const CurriculumState& state, const TrainFlags& flags) {
  if (!flags.no_curriculum) return state;
  CurriculumState wide = state;
  wide.j = wide.j_max;  // widest bounds from the first step
  return wide;
}

}  // namespace

void LossWeights::validate() const {
  if (lambda_perceptual < 0.0 || lambda_in < 0.0 || lambda_pix < 0.0 || lambda_sem < 0.0)
    throw std::invalid_argument("LossWeights: weights must be non-negative");
}

Var render_composited(Tape& t, Var planes, const DecoderVars& dec, const CameraPose& pose,
                      const RenderSettings& s) {
  Var rgba = renderfield::render(t, planes, dec, pose, s, nullptr);
  Var rgb = ad::composite_over(t, rgba, renderfield::kGray);
  return ad::reshape(t, rgb, {s.resolution, s.resolution, 3});
}

Var supervised_loss(Tape& t, const BoundParams& bound, const SynthSample& sample,
                    const LossWeights& weights, const TrainSetup& setup,
                    const PerceptualBackend* perceptual) {
  weights.validate();
  if (sample.views.empty() || sample.views.size() != sample.poses.size())
    throw std::invalid_argument("supervised_loss: need one pose per ground-truth view");

  Var planes = reconstructor::reconstruct(t, bound, t.constant(sample.input));
  const DecoderVars dec = bound.decoder(t);
  const int res = setup.render.resolution;

  Var acc = t.constant(Tensor({1}, {0.0}));
  for (size_t i = 0; i < sample.views.size(); ++i) {
    const CameraPose pose = geometry::compose_relative(sample.poses[i], setup.rig);
    Var img = render_composited(t, planes, dec, pose, setup.render);
    Var target = t.constant(resize_to(sample.views[i], res));
    Var term = ad::mse(t, img, target);
    if (weights.lambda_perceptual > 0.0 && perceptual != nullptr)
      term = ad::add(t, term,
                     ad::scale(t, perceptual->distance(t, img, target), weights.lambda_perceptual));
    acc = ad::add(t, acc, term);
  }
  return ad::scale(t, acc, 1.0 / static_cast<double>(sample.views.size()));
}

Var input_view_loss(Tape& t, Var planes, const DecoderVars& dec, const Tensor& input,
                    const TrainSetup& setup) {
  const CameraPose pose = geometry::compose_relative({0.0, 0.0}, setup.rig);
  Var img = render_composited(t, planes, dec, pose, setup.render);
  return ad::mse(t, img, t.constant(resize_to(input, setup.render.resolution)));
}

Var cycle_loss(Tape& t, const BoundParams& bound, Var planes, const Tensor& input,
               const CurriculumState& state, Rng& rng, const TrainFlags& flags,
               const TrainSetup& setup, CycleDiagnostics* diag) {
  const geometry::RelativePose delta = sample_cycle_pose(effective_state(state, flags), rng);
  if (diag != nullptr) diag->delta = delta;
  const CameraPose view_pose = geometry::compose_relative(delta, setup.rig);
  const CameraPose back_pose =
      geometry::compose_relative(geometry::invert_delta(delta), setup.rig);
  const int model_res = bound.params->config.input_resolution;
  const DecoderVars dec = bound.decoder(t);

  Var planes2;
  if (flags.e2e_cycle) {
    Var img1 = render_composited(t, planes, dec, view_pose, setup.render);
    Var fed = (setup.render.resolution == model_res)
                  ? img1
                  : ad::bilinear_resize(t, img1, model_res, model_res);
    planes2 = reconstructor::reconstruct(t, bound, fed);
  } else {
    // Stop-gradient: run the first pass outside the tape and feed the image
    // back in as a constant. The plain path rounds identically to the tape
    // path, so this is exactly sg() of the rendered view.
    const renderfield::Triplane tri{t.val(planes)};
    renderfield::FieldDecoder dec_plain;
    reconstructor::decoder_from_params(*bound.params, dec_plain);
    const renderfield::RenderedView view =
        renderfield::render_plain(tri, dec_plain, view_pose, setup.render, nullptr);
    const Tensor composited = renderfield::composite_background(view, renderfield::kGray);
    planes2 = reconstructor::reconstruct(t, bound, t.constant(resize_to(composited, model_res)));
  }

  Var img2 = render_composited(t, planes2, dec, back_pose, setup.render);
  return ad::mse(t, img2, t.constant(resize_to(input, setup.render.resolution)));
}

Var semantic_loss(Tape& t, const BoundParams& bound, Var planes, const Tensor& input,
                  const SemanticEmbedder& embedder, Rng& rng, const TrainFlags& flags,
                  const TrainSetup& setup, SemanticDiagnostics* diag) {
  const int m = flags.semantic_views;
  if (m < 1) throw std::invalid_argument("semantic_loss: need at least one candidate view");
  const std::vector<geometry::RelativePose> poses = sample_semantic_poses(m, rng);

  const renderfield::Triplane tri{t.val(planes)};
  renderfield::FieldDecoder dec_plain;
  reconstructor::decoder_from_params(*bound.params, dec_plain);
  const Tensor f_input = embedder.embed_plain(input);

  std::vector<double> sims(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const CameraPose pose = geometry::compose_relative(poses[static_cast<size_t>(i)], setup.rig);
    const renderfield::RenderedView view =
        renderfield::render_plain(tri, dec_plain, pose, setup.render, nullptr);
    const Tensor cand = renderfield::composite_background(view, renderfield::kGray);
    const Tensor f_cand = embedder.embed_plain(cand);
    double s = 0.0;
    for (size_t k = 0; k < f_cand.numel(); ++k) s += f_cand[k] * f_input[k];
    sims[static_cast<size_t>(i)] = s;
  }
  int picked = 0;
  for (int i = 1; i < m; ++i)
    if (sims[static_cast<size_t>(i)] < sims[static_cast<size_t>(picked)]) picked = i;
  if (diag != nullptr) {
    diag->similarities = sims;
    diag->picked = picked;
  }

  const DecoderVars dec = bound.decoder(t);
  Var f_in_c = t.constant(f_input);
  auto term_for = [&](int i) {
    const CameraPose pose = geometry::compose_relative(poses[static_cast<size_t>(i)], setup.rig);
    Var img = render_composited(t, planes, dec, pose, setup.render);
    Var f = embedder.embed(t, img);
    return ad::scale(t, ad::dot(t, f, f_in_c), -1.0);
  };

  if (!flags.naive_semantic) return term_for(picked);
  Var acc = term_for(0);
  for (int i = 1; i < m; ++i) acc = ad::add(t, acc, term_for(i));
  return ad::scale(t, acc, 1.0 / static_cast<double>(m));
}

Var self_training_loss(Tape& t, const BoundParams& bound, const RealSample& sample,
                       const CurriculumState& state, const SemanticEmbedder& embedder,
                       const LossWeights& weights, Rng& rng, const TrainFlags& flags,
                       const TrainSetup& setup, SelfTrainParts* parts) {
  weights.validate();
  if (weights.lambda_in == 0.0 && weights.lambda_pix == 0.0 && weights.lambda_sem == 0.0) {
    if (parts != nullptr) *parts = SelfTrainParts{};
    return t.constant(Tensor({1}, {0.0}));
  }
  Var planes = reconstructor::reconstruct(t, bound, t.constant(sample.input));
  const DecoderVars dec = bound.decoder(t);

  Var total = t.constant(Tensor({1}, {0.0}));
  SelfTrainParts local;
  if (weights.lambda_in > 0.0) {
    Var l_in = input_view_loss(t, planes, dec, sample.input, setup);
    local.input_view = t.val(l_in)[0];
    total = ad::add(t, total, ad::scale(t, l_in, weights.lambda_in));
  }
  if (weights.lambda_pix > 0.0) {
    Var l_cyc = cycle_loss(t, bound, planes, sample.input, state, rng, flags, setup,
                           &local.cycle_diag);
    local.cycle = t.val(l_cyc)[0];
    total = ad::add(t, total, ad::scale(t, l_cyc, weights.lambda_pix));
  }
  if (weights.lambda_sem > 0.0) {
    Var l_sem = semantic_loss(t, bound, planes, sample.input, embedder, rng, flags, setup,
                              &local.semantic_diag);
    local.semantic = t.val(l_sem)[0];
    total = ad::add(t, total, ad::scale(t, l_sem, weights.lambda_sem));
  }
  local.total = t.val(total)[0];
  if (parts != nullptr) *parts = local;
  return total;
}

}  // namespace svr::selftrain
