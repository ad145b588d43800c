#pragma once

#include <vector>

#include "core/tensor.hpp"

namespace svr::curation {

// Boundary band of one instance: the mask minus its 9x9 erosion.
core::Tensor instance_boundary(const core::Tensor& mask);

// Portion of `boundary` lying within the 15x15 dilation of any other
// instance's boundary band — the pixels where two instances touch.
core::Tensor contact_boundary(const core::Tensor& boundary,
                              const std::vector<core::Tensor>& other_boundaries);

// Outward unit normal at a boundary pixel; x grows with the column index,
// y with the row index.
struct BoundaryNormal {
  double nx = 0.0, ny = 0.0;
};

enum class NormalStatus {
  ok,
  interior,    // all 8 neighbors inside the mask
  degenerate,  // zero gradient
  ambiguous,   // both side probes land on the same mask value
};

// Precomputed smoothed-gradient field for repeated normal queries on one mask.
struct NormalField {
  const core::Tensor* mask = nullptr;
  core::Tensor gx, gy;
};
NormalField make_normal_field(const core::Tensor& mask);

NormalStatus query_normal(const NormalField& field, int row, int col, BoundaryNormal& out);

// One-shot variant.
NormalStatus boundary_normal(const core::Tensor& mask, int row, int col, BoundaryNormal& out);

}  // namespace svr::curation
