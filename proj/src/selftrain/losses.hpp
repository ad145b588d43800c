#pragma once

#include <vector>

#include "reconstructor/model.hpp"
#include "selftrain/curriculum.hpp"
#include "selftrain/embedder.hpp"
#include "selftrain/perceptual.hpp"

namespace svr::selftrain {

struct LossWeights {
  double lambda_perceptual = 1.0;
  double lambda_in = 0.3;
  double lambda_pix = 5.0;
  double lambda_sem = 1.0;

  void validate() const;
};

// Multi-view supervised instance: input view at the canonical pose plus n
// ground-truth views with relative poses.
struct SynthSample {
  core::Tensor input;                        // (R,R,3), gray-composited
  std::vector<core::Tensor> views;           // n images at render resolution
  std::vector<geometry::RelativePose> poses;  // n relative poses
};

// Single-view instance: just the input image.
struct RealSample {
  core::Tensor input;  // (R,R,3), gray-composited
};

struct TrainFlags {
  bool naive_semantic = false;   // mean over candidates instead of hard negative
  bool e2e_cycle = false;        // let gradients flow through the first cycle pass
  bool no_curriculum = false;    // cycle poses always use the widest bounds
  int semantic_views = 4;
};

// Shared geometry/render configuration for all training losses.
struct TrainSetup {
  geometry::CameraRig rig;
  renderfield::RenderSettings render;  // resolution used for all loss renders
};

struct CycleDiagnostics {
  geometry::RelativePose delta;
};

struct SemanticDiagnostics {
  std::vector<double> similarities;
  int picked = -1;
};

struct SelfTrainParts {
  double input_view = 0.0, cycle = 0.0, semantic = 0.0, total = 0.0;
  CycleDiagnostics cycle_diag;
  SemanticDiagnostics semantic_diag;
};

// Render planes at a pose and composite onto the gray background -> (res,res,3).
ad::Var render_composited(ad::Tape& t, ad::Var planes, const renderfield::DecoderVars& dec,
                          const geometry::CameraPose& pose, const renderfield::RenderSettings& s);

// (1/n) sum_i [ MSE + lambda * perceptual ] over the ground-truth views.
ad::Var supervised_loss(ad::Tape& t, const reconstructor::BoundParams& bound,
                        const SynthSample& sample, const LossWeights& weights,
                        const TrainSetup& setup, const PerceptualBackend* perceptual);

// MSE between the canonical-pose render of `planes` and the input image.
ad::Var input_view_loss(ad::Tape& t, ad::Var planes, const renderfield::DecoderVars& dec,
                        const core::Tensor& input, const TrainSetup& setup);

// Render a curriculum-sampled view, feed it back through the model, render the
// inverse view and compare with the input. The first pass is a constant
// (stop-gradient) unless flags.e2e_cycle.
ad::Var cycle_loss(ad::Tape& t, const reconstructor::BoundParams& bound, ad::Var planes,
                   const core::Tensor& input, const CurriculumState& state, core::Rng& rng,
                   const TrainFlags& flags, const TrainSetup& setup, CycleDiagnostics* diag);

// Hard-negative semantic term: render m wide-range candidates, pick the one
// least similar to the input, and return -similarity for it (mean over all m
// when flags.naive_semantic).
ad::Var semantic_loss(ad::Tape& t, const reconstructor::BoundParams& bound, ad::Var planes,
                      const core::Tensor& input, const SemanticEmbedder& embedder,
                      core::Rng& rng, const TrainFlags& flags, const TrainSetup& setup,
                      SemanticDiagnostics* diag);

// lambda_in * L_in + lambda_pix * L_cycle + lambda_sem * L_sem for one
// single-view sample. Terms with zero weight are skipped entirely.
ad::Var self_training_loss(ad::Tape& t, const reconstructor::BoundParams& bound,
                           const RealSample& sample, const CurriculumState& state,
                           const SemanticEmbedder& embedder, const LossWeights& weights,
                           core::Rng& rng, const TrainFlags& flags, const TrainSetup& setup,
                           SelfTrainParts* parts);

}  // namespace svr::selftrain
