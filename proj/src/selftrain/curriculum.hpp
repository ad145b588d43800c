#pragma once

#include <utility>
#include <vector>

#include "core/rng.hpp"
#include "geometry/pose.hpp"

namespace svr::selftrain {

// Linear widening schedule for the cycle-pose sampling range.
struct CurriculumState {
  long j = 0;
  long j_max = 2000;
  double theta_min_deg = 15.0, theta_max_deg = 90.0;
  double phi_min_deg = 15.0, phi_max_deg = 90.0;

  void validate() const;
};

// (theta_max_j, phi_max_j): linear ramp from the min endpoints at j=0 to the
// max endpoints at j=j_max.
std::pair<double, double> curriculum_bounds(const CurriculumState& state);

// Azimuth ~ U(-theta_max_j, theta_max_j), elevation ~ U(-phi_max_j, phi_max_j).
geometry::RelativePose sample_cycle_pose(const CurriculumState& state, core::Rng& rng);

// Iteration-independent wide-range poses for the semantic term.
std::vector<geometry::RelativePose> sample_semantic_poses(int m, core::Rng& rng);

constexpr double kSemanticAzimuthMax = 120.0;
constexpr double kSemanticElevationMax = 45.0;

}  // namespace svr::selftrain
