#include "support/golden_scenes.hpp"

#include <cstdio>
#include <filesystem>

using svr::core::Tensor;
using svr::curation::CurationConfig;
using svr::curation::SceneRecord;

namespace {

constexpr double kBackgroundDepth = 0.12;

SceneRecord blank_scene(const std::string& name, int h, int w) {
  SceneRecord scene;
  scene.name = name;
  scene.image = Tensor({h, w, 3});
  for (std::size_t i = 0; i < scene.image.numel(); ++i) scene.image[i] = 0.2;
  scene.inverse_depth = Tensor({h, w});
  for (std::size_t i = 0; i < scene.inverse_depth.numel(); ++i) {
    scene.inverse_depth[i] = kBackgroundDepth;
  }
  return scene;
}

// Inclusive pixel bounds; paints the image block, the depth plate, and a mask.
void add_rect(SceneRecord& scene, const std::string& id, int r0, int c0, int r1, int c1,
              double inv_depth, double confidence = 1.0,
              const std::string& category = "thing") {
  const int h = scene.inverse_depth.shape()[0];
  const int w = scene.inverse_depth.shape()[1];
  Tensor mask({h, w});
  const double shade = 0.35 + 0.13 * (scene.instances.size() % 5);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      mask.at(r, c) = 1.0;
      scene.inverse_depth.at(r, c) = inv_depth;
      scene.image.at(r, c, 0) = shade;
      scene.image.at(r, c, 1) = 1.0 - shade;
      scene.image.at(r, c, 2) = 0.6;
    }
  }
  scene.instances.push_back({id, confidence, category});
  scene.masks.push_back(std::move(mask));
}

void add_empty(SceneRecord& scene, const std::string& id) {
  const int h = scene.inverse_depth.shape()[0];
  const int w = scene.inverse_depth.shape()[1];
  scene.instances.push_back({id, 1.0, "thing"});
  scene.masks.push_back(Tensor({h, w}));
}

std::string scene_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "golden_%03d", index);
  return buf;
}

}  // namespace

CurationConfig golden_curation_config() {
  CurationConfig cfg;
  cfg.category_denylist = {"bus"};
  cfg.seed = 77;
  cfg.crop_resolution = 96;
  return cfg;
}

std::vector<GoldenScene> golden_curation_suite() {
  std::vector<GoldenScene> suite;
  int counter = 0;

  // Adjacent-pair scenes: the rear plate shares a full edge with a nearer
  // plate, so its contact probes read a larger inverse depth outside.
  for (int i = 0; i < 20; ++i) {
    GoldenScene g;
    g.scene = blank_scene(scene_name(counter++), 256, 256);
    const double back_depth = 0.30 + 0.01 * i;
    const double front_depth = 0.88 + 0.004 * i;
    if (i % 2 == 0) {
      const int r0 = 16 + (i % 5), r1 = 208 - (i % 7);
      const int edge = 116 + (i % 3);
      add_rect(g.scene, "back", r0, 12, r1, edge, back_depth);
      add_rect(g.scene, "front", r0, edge + 1, r1, edge + 105, front_depth);
    } else {
      add_rect(g.scene, "back", 12, 20 + (i % 4), 116, 200 + (i % 4), back_depth);
      add_rect(g.scene, "front", 117, 20 + (i % 4), 221, 200 + (i % 4), front_depth);
    }
    g.expected.push_back({"back", false, "occluded", true});
    g.expected.push_back({"front", true, "none", false});
    suite.push_back(std::move(g));
  }

  // Isolated plates, singly or in well-separated pairs: nothing to contact.
  for (int i = 0; i < 14; ++i) {
    GoldenScene g;
    if (i % 3 == 0) {
      g.scene = blank_scene(scene_name(counter++), 256, 320);
      add_rect(g.scene, "left", 30 + i, 12, 190 + i, 112, 0.5);
      add_rect(g.scene, "right", 30 + i, 153, 190 + i, 255, 0.7);
      g.expected.push_back({"left", true, "none", false});
      g.expected.push_back({"right", true, "none", false});
    } else {
      g.scene = blank_scene(scene_name(counter++), 256, 256);
      add_rect(g.scene, "solo", 14 + i, 30, 130 + i, 140, 0.7);
      g.expected.push_back({"solo", true, "none", false});
    }
    suite.push_back(std::move(g));
  }

  // Confidence gate: one plate just under the threshold, one exactly at it.
  const double low_conf[3] = {0.29, 0.2, 0.05};
  for (int i = 0; i < 3; ++i) {
    GoldenScene g;
    g.scene = blank_scene(scene_name(counter++), 256, 320);
    add_rect(g.scene, "weak", 40, 12, 180, 112, 0.5, low_conf[i]);
    add_rect(g.scene, "firm", 40, 153, 180, 255, 0.7, 0.30);
    g.expected.push_back({"weak", false, "low-confidence", false});
    g.expected.push_back({"firm", true, "none", false});
    suite.push_back(std::move(g));
  }

  // Scale gate in a 512-pixel frame.
  const int small_w[3] = {99, 120, 80};
  const int small_h[3] = {120, 99, 80};
  for (int i = 0; i < 3; ++i) {
    GoldenScene g;
    g.scene = blank_scene(scene_name(counter++), 512, 512);
    const int c0 = 256 - small_w[i] / 2, r0 = 256 - small_h[i] / 2;
    add_rect(g.scene, "tiny", r0, c0, r0 + small_h[i] - 1, c0 + small_w[i] - 1, 0.6);
    g.expected.push_back({"tiny", false, "small", false});
    suite.push_back(std::move(g));
  }

  // Border gate: a healthy plate pushed within the margin.
  for (int i = 0; i < 3; ++i) {
    GoldenScene g;
    g.scene = blank_scene(scene_name(counter++), 512, 512);
    if (i == 0) {
      add_rect(g.scene, "clipped", 181, 5, 330, 154, 0.6);
    } else if (i == 1) {
      add_rect(g.scene, "clipped", 5, 181, 154, 330, 0.6);
    } else {
      add_rect(g.scene, "clipped", 181, 352, 330, 506, 0.6);
    }
    g.expected.push_back({"clipped", false, "truncated", false});
    suite.push_back(std::move(g));
  }

  // Category denylist.
  for (int i = 0; i < 3; ++i) {
    GoldenScene g;
    g.scene = blank_scene(scene_name(counter++), 256, 256);
    add_rect(g.scene, "vehicle", 60, 60, 190, 190, 0.6, 1.0, "bus");
    g.expected.push_back({"vehicle", false, "category", false});
    suite.push_back(std::move(g));
  }

  // Degenerate annotations: empty masks, alone or next to a healthy plate.
  for (int i = 0; i < 6; ++i) {
    GoldenScene g;
    g.scene = blank_scene(scene_name(counter++), 256, 256);
    add_empty(g.scene, "ghost");
    g.expected.push_back({"ghost", false, "degenerate-boundary", false});
    if (i % 2 == 1) {
      add_rect(g.scene, "solid", 40, 40, 180, 180, 0.7);
      g.expected.push_back({"solid", true, "none", false});
    }
    suite.push_back(std::move(g));
  }

  return suite;
}

void write_golden_suite(const std::string& root) {
  std::filesystem::create_directories(root);
  for (const GoldenScene& g : golden_curation_suite()) {
    svr::curation::save_scene(g.scene, root + "/" + g.scene.name);
  }
}
