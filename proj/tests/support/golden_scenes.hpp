#pragma once

#include <string>
#include <vector>

#include "curation/curate.hpp"

// Hand-constructed curation scenes with verdicts known from the geometry of
// the construction, used as the oracle suite for the filter chain.

struct GoldenExpectation {
  std::string id;
  bool keep = false;
  std::string reason;  // "none" when keep
  bool occluded_truth = false;
};

struct GoldenScene {
  svr::curation::SceneRecord scene;
  std::vector<GoldenExpectation> expected;
};

svr::curation::CurationConfig golden_curation_config();

std::vector<GoldenScene> golden_curation_suite();

// Writes every scene as a folder under root, ready for the dataset pipeline.
void write_golden_suite(const std::string& root);
