#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "core/tensor.hpp"
#include "dataworld/datasets.hpp"
#include "geometry/pose.hpp"
#include "reconstructor/model.hpp"
#include "renderfield/render.hpp"
#include "selftrain/embedder.hpp"
#include "selftrain/perceptual.hpp"

namespace svr::evalharness {

// A single reconstruction, renderable at poses relative to its input camera.
class EvalReconstruction {
 public:
  virtual ~EvalReconstruction() = default;
  virtual renderfield::RenderedView render(const geometry::RelativePose& delta,
                                           const renderfield::RenderSettings& settings) = 0;
};

class EvalModel {
 public:
  virtual ~EvalModel() = default;
  virtual std::unique_ptr<EvalReconstruction> reconstruct(const core::Tensor& input) = 0;
};

// Runs the trained image-to-triplane reconstructor from a parameter snapshot.
class ReconstructorEvalModel : public EvalModel {
 public:
  ReconstructorEvalModel(const reconstructor::ReconstructorParams& params,
                         geometry::CameraRig rig);
  std::unique_ptr<EvalReconstruction> reconstruct(const core::Tensor& input) override;

 private:
  const reconstructor::ReconstructorParams* params_;
  geometry::CameraRig rig_;
};

// Renders a fixed analytic field regardless of the input image; the reference
// point for protocol self-tests and trivial baselines.
class FieldEvalModel : public EvalModel {
 public:
  FieldEvalModel(const renderfield::DensityColorField& field, geometry::CameraRig rig);
  std::unique_ptr<EvalReconstruction> reconstruct(const core::Tensor& input) override;

 private:
  const renderfield::DensityColorField* field_;
  geometry::CameraRig rig_;
};

struct EvalInstance {
  std::string id;
  core::Tensor input;  // (R,R,3), gray-composited crop
};

struct InstanceRow {
  std::string id;
  std::map<std::string, double> values;
};

struct MetricsReport {
  std::string suite;
  std::uint64_t config_hash = 0;
  std::vector<geometry::RelativePose> poses;
  double crop_ratio = 0.0;  // 0 when the protocol has no re-crop step
  int views_per_instance = 0;
  bool fid_omitted = true;
  std::vector<InstanceRow> rows;
  std::map<std::string, double> aggregate;

  void finalize();  // recompute aggregate means from rows
  std::string to_json() const;
  static MetricsReport from_json(const std::string& text);
  std::string summary_table() const;
};

struct EvalContext {
  const selftrain::SemanticEmbedder* embedder = nullptr;
  const selftrain::PerceptualBackend* perceptual = nullptr;
  renderfield::RenderSettings settings;  // resolution is overridden per target
  std::uint64_t config_hash = 0;
};

// 7 azimuths evenly spaced around the circle starting at 0, elevation 0.
std::vector<geometry::RelativePose> semantic_pose_schedule();
// The 13 fixed azimuth/elevation pairs of the consistency protocol.
std::vector<geometry::RelativePose> consistency_pose_schedule();

MetricsReport semantic_similarity_suite(EvalModel& model,
                                        const std::vector<EvalInstance>& instances,
                                        const EvalContext& ctx);

MetricsReport self_consistency_suite(EvalModel& model,
                                     const std::vector<EvalInstance>& instances,
                                     const EvalContext& ctx);

MetricsReport nvs_suite(EvalModel& model,
                        const std::vector<dataworld::SealedInstance>& instances,
                        const EvalContext& ctx);

}  // namespace svr::evalharness
