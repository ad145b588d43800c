#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace svr::curation {

enum class DropReason {
  none,
  low_confidence,
  small,
  truncated,
  category,
  occluded,
  degenerate_boundary,
};

const char* reason_name(DropReason reason);

struct ProbeDiag {
  int row = 0, col = 0;
  bool accepted = false;
  bool occluded = false;
  double ratio = 0.0;
};

struct CurationVerdict {
  bool keep = false;
  DropReason reason = DropReason::none;
  int probes_accepted = 0;
  int probes_occluded = 0;
  double vote_fraction = 0.0;
  std::vector<ProbeDiag> probes;
};

struct InstanceMeta {
  std::string id;
  double confidence = 1.0;
  std::string category;
};

struct SceneRecord {
  std::string name;
  core::Tensor image;              // (H,W,3) in [0,1]
  core::Tensor inverse_depth;      // (H,W), larger values are nearer
  std::vector<InstanceMeta> instances;
  std::vector<core::Tensor> masks;  // (H,W) binary, one per instance
};

struct CurationConfig {
  double confidence_threshold = 0.3;
  int min_bbox_side = 100;
  int border_margin = 10;
  std::vector<std::string> category_denylist;
  int probe_count = 20;
  double probe_step_frac = 0.05;
  double depth_ratio_threshold = 0.95;
  double occluded_vote_frac = 0.5;
  std::uint64_t seed = 0;
  int crop_resolution = 128;
};

bool filter_confidence(double confidence, double threshold = 0.3);

// Checks the mask footprint against the image frame. Returns none when the
// instance passes, otherwise small / truncated / degenerate_boundary.
DropReason filter_small_truncated(const core::Tensor& mask, int min_bbox_side = 100,
                                  int border_margin = 10);

bool filter_category(const std::string& category, const std::vector<std::string>& denylist);

CurationVerdict occlusion_verdict(const SceneRecord& scene, int instance_index,
                                  const CurationConfig& cfg, core::Rng& rng);

// Full per-instance decision chain: confidence, scale/truncation, category,
// then the depth-based occlusion vote.
CurationVerdict curate_instance(const SceneRecord& scene, int instance_index,
                                const CurationConfig& cfg, core::Rng& rng);

struct CurationReport {
  int scenes_read = 0;
  int scenes_unreadable = 0;
  int instances_in = 0;
  int kept = 0;
  std::map<std::string, int> dropped;
  int dropped_total() const;
};

// Scene folder IO: image.png, depth.png (16-bit inverse depth), masks/<id>.png,
// meta.json listing the instances.
SceneRecord load_scene(const std::string& dir);
void save_scene(const SceneRecord& scene, const std::string& dir);

// Walks every scene folder under in_root, writes manifest.jsonl, report.json,
// and a kept/<scene>_<id>/ crop folder per surviving instance.
CurationReport curate_dataset(const std::string& in_root, const std::string& out_root,
                              const CurationConfig& cfg);

}  // namespace svr::curation
