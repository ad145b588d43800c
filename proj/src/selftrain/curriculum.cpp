#include "selftrain/curriculum.hpp"

#include <stdexcept>

namespace svr::selftrain {

void CurriculumState::validate() const {
  if (j_max == 0) throw std::invalid_argument("curriculum: j_max must be nonzero");
  if (j_max < 0 || j < 0 || j > j_max) throw std::invalid_argument("curriculum: need 0 <= j <= j_max");
  if (theta_min_deg > theta_max_deg || phi_min_deg > phi_max_deg)
    throw std::invalid_argument("curriculum: endpoint bounds must satisfy min <= max");
}

std::pair<double, double> curriculum_bounds(const CurriculumState& state) {
  state.validate();
  const double frac = static_cast<double>(state.j) / static_cast<double>(state.j_max);
  return {frac * (state.theta_max_deg - state.theta_min_deg) + state.theta_min_deg,
          frac * (state.phi_max_deg - state.phi_min_deg) + state.phi_min_deg};
}

geometry::RelativePose sample_cycle_pose(const CurriculumState& state, core::Rng& rng) {
  const auto [theta, phi] = curriculum_bounds(state);
  return {rng.uniform(-theta, theta), rng.uniform(-phi, phi)};
}

std::vector<geometry::RelativePose> sample_semantic_poses(int m, core::Rng& rng) {
  if (m < 1) throw std::invalid_argument("sample_semantic_poses: m must be >= 1");
  std::vector<geometry::RelativePose> poses;
  poses.reserve(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i)
    poses.push_back({rng.uniform(-kSemanticAzimuthMax, kSemanticAzimuthMax),
                     rng.uniform(-kSemanticElevationMax, kSemanticElevationMax)});
  return poses;
}

}  // namespace svr::selftrain
