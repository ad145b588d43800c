#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/image.hpp"
#include "core/png_io.hpp"
#include "core/rng.hpp"
#include "core/serialize.hpp"
#include "curation/boundary.hpp"
#include "curation/curate.hpp"
#include "support/golden_scenes.hpp"

using namespace svr;
using core::Tensor;
using namespace svr::curation;
namespace fs = std::filesystem;

namespace {

Tensor brute_morph(const Tensor& mask, int k, bool erode_mode) {
  const int h = static_cast<int>(mask.shape()[0]);
  const int w = static_cast<int>(mask.shape()[1]);
  const int rad = k / 2;
  Tensor out(mask.shape());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      bool acc = erode_mode;
      for (int dr = -rad; dr <= rad; ++dr) {
        for (int dc = -rad; dc <= rad; ++dc) {
          const int rr = r + dr, cc = c + dc;
          const bool v =
              rr >= 0 && rr < h && cc >= 0 && cc < w && mask.at(rr, cc) > 0.5;
          if (erode_mode) {
            acc = acc && v;
          } else {
            acc = acc || v;
          }
        }
      }
      out.at(r, c) = acc ? 1.0 : 0.0;
    }
  }
  return out;
}

int pixel_mismatches(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  int bad = 0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    if ((a[i] > 0.5) != (b[i] > 0.5)) ++bad;
  }
  return bad;
}

Tensor rect_mask(int h, int w, int r0, int c0, int r1, int c1) {
  Tensor mask({h, w});
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) mask.at(r, c) = 1.0;
  }
  return mask;
}

int count_on(const Tensor& mask) {
  int n = 0;
  for (std::size_t i = 0; i < mask.numel(); ++i) {
    if (mask[i] > 0.5) ++n;
  }
  return n;
}

// Two plates sharing a vertical edge, rear one at half the inverse depth.
SceneRecord adjacent_plates_scene() {
  SceneRecord scene;
  scene.name = "pair";
  scene.image = Tensor({200, 200, 3});
  for (std::size_t i = 0; i < scene.image.numel(); ++i) scene.image[i] = 0.3;
  scene.inverse_depth = Tensor({200, 200});
  for (std::size_t i = 0; i < scene.inverse_depth.numel(); ++i) {
    scene.inverse_depth[i] = 0.12;
  }
  auto paint = [&](const std::string& id, int r0, int c0, int r1, int c1, double d) {
    Tensor mask = rect_mask(200, 200, r0, c0, r1, c1);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) scene.inverse_depth.at(r, c) = d;
    }
    scene.instances.push_back({id, 1.0, "thing"});
    scene.masks.push_back(std::move(mask));
  };
  paint("back", 40, 20, 160, 100, 0.5);
  paint("front", 40, 101, 160, 180, 1.0);
  return scene;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("morphology matches brute force on random masks") {
  core::Rng rng(4021);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 8 + rng.uniform_int(57);
    const int w = 8 + rng.uniform_int(57);
    Tensor mask({h, w});
    for (std::size_t i = 0; i < mask.numel(); ++i) {
      mask[i] = rng.uniform() < 0.45 ? 1.0 : 0.0;
    }
    CHECK_EQ(pixel_mismatches(core::erode(mask, 9), brute_morph(mask, 9, true)), 0);
    CHECK_EQ(pixel_mismatches(core::dilate(mask, 15), brute_morph(mask, 15, false)), 0);

    Tensor band = instance_boundary(mask);
    Tensor brute_band(mask.shape());
    Tensor eroded = brute_morph(mask, 9, true);
    for (std::size_t i = 0; i < mask.numel(); ++i) {
      brute_band[i] = (mask[i] > 0.5 && eroded[i] <= 0.5) ? 1.0 : 0.0;
    }
    CHECK_EQ(pixel_mismatches(band, brute_band), 0);

    Tensor other({h, w});
    for (std::size_t i = 0; i < other.numel(); ++i) {
      other[i] = rng.uniform() < 0.3 ? 1.0 : 0.0;
    }
    Tensor other_band = instance_boundary(other);
    Tensor contact = contact_boundary(band, {other_band});
    Tensor reach = brute_morph(other_band, 15, false);
    Tensor brute_contact(mask.shape());
    for (std::size_t i = 0; i < mask.numel(); ++i) {
      brute_contact[i] = (band[i] > 0.5 && reach[i] > 0.5) ? 1.0 : 0.0;
    }
    CHECK_EQ(pixel_mismatches(contact, brute_contact), 0);
  }
}

TEST_CASE("instance boundary bands") {
  Tensor full({64, 64});
  for (std::size_t i = 0; i < full.numel(); ++i) full[i] = 1.0;
  Tensor ring = instance_boundary(full);
  CHECK_EQ(count_on(ring), 64 * 64 - 56 * 56);
  CHECK_EQ(ring.at(3, 30), 1.0);
  CHECK_EQ(ring.at(4, 30), 0.0);
  CHECK_EQ(ring.at(30, 60), 1.0);

  Tensor small_sq = rect_mask(32, 32, 10, 10, 15, 15);
  CHECK_EQ(pixel_mismatches(instance_boundary(small_sq), small_sq), 0);

  Tensor empty({32, 32});
  CHECK_EQ(count_on(instance_boundary(empty)), 0);
}

TEST_CASE("contact boundary reaches only nearby bands") {
  Tensor left = rect_mask(128, 128, 20, 10, 100, 60);
  Tensor right = rect_mask(128, 128, 20, 61, 100, 110);
  Tensor band_l = instance_boundary(left);
  Tensor band_r = instance_boundary(right);

  Tensor contact = contact_boundary(band_l, {band_r});
  CHECK_GT(count_on(contact), 0);
  for (int r = 0; r < 128; ++r) {
    for (int c = 0; c < 128; ++c) {
      if (contact.at(r, c) > 0.5) {
        CHECK_EQ(band_l.at(r, c), 1.0);  // subset of the queried band
        CHECK_GE(c, 61 - 8);             // confined to the shared-edge side
      }
    }
  }
  // The strip runs along the full shared edge.
  int strip_rows = 0;
  for (int r = 20; r <= 100; ++r) {
    if (contact.at(r, 60) > 0.5) ++strip_rows;
  }
  CHECK_EQ(strip_rows, 81);

  Tensor far_right = rect_mask(128, 128, 20, 101, 100, 127);
  Tensor far_band = instance_boundary(far_right);
  Tensor gap_contact = contact_boundary(instance_boundary(rect_mask(128, 128, 20, 10, 100, 60)),
                                        {far_band});
  CHECK_EQ(count_on(gap_contact), 0);

  CHECK_EQ(count_on(contact_boundary(band_l, {})), 0);
}

TEST_CASE("boundary normals on a step edge") {
  Tensor sq = rect_mask(64, 64, 12, 20, 52, 50);
  BoundaryNormal n;
  REQUIRE_EQ(boundary_normal(sq, 30, 20, n), NormalStatus::ok);
  const double dot = -n.nx;  // against (-1, 0)
  CHECK_GE(dot, std::cos(5.0 * M_PI / 180.0));
  CHECK_EQ(n.nx * n.nx + n.ny * n.ny, doctest::Approx(1.0).epsilon(1e-12));

  REQUIRE_EQ(boundary_normal(sq, 52, 35, n), NormalStatus::ok);
  CHECK_GE(n.ny, std::cos(5.0 * M_PI / 180.0));  // bottom edge points down

  CHECK_EQ(boundary_normal(sq, 30, 35, n), NormalStatus::interior);

  Tensor spur({64, 64});
  for (int c = 5; c <= 25; ++c) spur.at(10, c) = 1.0;
  CHECK_NE(boundary_normal(spur, 10, 15, n), NormalStatus::ok);

  Tensor flat({16, 16});
  CHECK_EQ(boundary_normal(flat, 8, 8, n), NormalStatus::degenerate);
}

TEST_CASE("occlusion verdict on the adjacent-plate scene") {
  SceneRecord scene = adjacent_plates_scene();
  CurationConfig cfg;

  core::Rng rng_back(901);
  CurationVerdict back = occlusion_verdict(scene, 0, cfg, rng_back);
  CHECK_FALSE(back.keep);
  CHECK_EQ(back.reason, DropReason::occluded);
  CHECK_GE(back.vote_fraction, 0.5);
  CHECK_GT(back.probes_accepted, 0);
  for (const ProbeDiag& p : back.probes) {
    if (p.accepted && p.occluded) CHECK_EQ(p.ratio, doctest::Approx(0.5).epsilon(1e-12));
  }

  core::Rng rng_front(902);
  CurationVerdict front = occlusion_verdict(scene, 1, cfg, rng_front);
  CHECK(front.keep);
  CHECK_EQ(front.reason, DropReason::none);
  CHECK_EQ(front.probes_occluded, 0);
  bool saw_cross_edge = false;
  for (const ProbeDiag& p : front.probes) {
    if (p.accepted && std::abs(p.ratio - 2.0) < 1e-9) saw_cross_edge = true;
    if (p.accepted) CHECK_GE(p.ratio, 0.95);
  }
  CHECK(saw_cross_edge);

  SceneRecord solo = scene;
  solo.instances.resize(1);
  solo.masks.resize(1);
  core::Rng rng_solo(903);
  CurationVerdict alone = occlusion_verdict(solo, 0, cfg, rng_solo);
  CHECK(alone.keep);
  CHECK(alone.probes.empty());
}

TEST_CASE("raising the depth-ratio threshold never rescues an occluded drop") {
  SceneRecord scene = adjacent_plates_scene();
  CurationConfig cfg;
  core::Rng base_rng(77);
  CurationVerdict base = occlusion_verdict(scene, 0, cfg, base_rng);
  REQUIRE_EQ(base.reason, DropReason::occluded);

  for (double threshold : {0.96, 0.97, 0.99, 0.999}) {
    CurationConfig tighter = cfg;
    tighter.depth_ratio_threshold = threshold;
    core::Rng rng(77);  // same seed -> same sampled points
    CurationVerdict v = occlusion_verdict(scene, 0, tighter, rng);
    CHECK_EQ(v.reason, DropReason::occluded);
    REQUIRE_EQ(v.probes.size(), base.probes.size());
    for (std::size_t i = 0; i < v.probes.size(); ++i) {
      CHECK_EQ(v.probes[i].row, base.probes[i].row);
      CHECK_EQ(v.probes[i].col, base.probes[i].col);
      if (base.probes[i].accepted && base.probes[i].occluded) {
        CHECK(v.probes[i].occluded);  // the occluded set only grows
      }
    }
  }
}

TEST_CASE("verdicts are deterministic for a fixed seed") {
  SceneRecord scene = adjacent_plates_scene();
  CurationConfig cfg;
  core::Rng a(1234), b(1234);
  CurationVerdict va = occlusion_verdict(scene, 0, cfg, a);
  CurationVerdict vb = occlusion_verdict(scene, 0, cfg, b);
  CHECK_EQ(va.keep, vb.keep);
  CHECK_EQ(va.vote_fraction, vb.vote_fraction);
  REQUIRE_EQ(va.probes.size(), vb.probes.size());
  for (std::size_t i = 0; i < va.probes.size(); ++i) {
    CHECK_EQ(va.probes[i].row, vb.probes[i].row);
    CHECK_EQ(va.probes[i].col, vb.probes[i].col);
    CHECK_EQ(va.probes[i].ratio, vb.probes[i].ratio);
  }
}

TEST_CASE("confidence and framing filters") {
  CHECK_FALSE(filter_confidence(0.29));
  CHECK(filter_confidence(0.30));
  CHECK(filter_confidence(1.0));

  Tensor small_box = rect_mask(512, 512, 196, 207, 315, 305);  // 99 wide
  CHECK_EQ(filter_small_truncated(small_box), DropReason::small);

  Tensor clipped = rect_mask(512, 512, 181, 5, 330, 154);
  CHECK_EQ(filter_small_truncated(clipped), DropReason::truncated);

  Tensor centered = rect_mask(512, 512, 181, 181, 330, 330);
  CHECK_EQ(filter_small_truncated(centered), DropReason::none);

  Tensor empty({512, 512});
  CHECK_EQ(filter_small_truncated(empty), DropReason::degenerate_boundary);

  CHECK_FALSE(filter_category("bus", {"bus"}));
  CHECK(filter_category("chair", {"bus"}));
  CHECK(filter_category("bus", {}));
}

TEST_CASE("golden suite verdicts match construction ground truth") {
  const CurationConfig cfg = golden_curation_config();
  const std::vector<GoldenScene> suite = golden_curation_suite();
  CHECK_GE(suite.size(), 50);

  int instances = 0;
  int false_keeps_on_occluded = 0;
  for (const GoldenScene& g : suite) {
    REQUIRE_EQ(g.expected.size(), g.scene.instances.size());
    for (std::size_t j = 0; j < g.expected.size(); ++j) {
      ++instances;
      core::Rng rng(core::mix64(cfg.seed, core::fnv1a(g.scene.name),
                                static_cast<std::uint64_t>(j)));
      CurationVerdict v = curate_instance(g.scene, static_cast<int>(j), cfg, rng);
      INFO(g.scene.name, " / ", g.expected[j].id);
      CHECK_EQ(v.keep, g.expected[j].keep);
      CHECK_EQ(std::string(reason_name(v.reason)), g.expected[j].reason);
      if (g.expected[j].occluded_truth && v.keep) ++false_keeps_on_occluded;
    }
  }
  CHECK_GE(instances, 50);
  CHECK_EQ(false_keeps_on_occluded, 0);
}

TEST_CASE("dataset pipeline conserves counts and is deterministic") {
  const fs::path in_root = fresh_dir("svr_curation_in");
  write_golden_suite(in_root.string());

  const CurationConfig cfg = golden_curation_config();
  const fs::path out_a = fresh_dir("svr_curation_out_a");
  CurationReport report = curate_dataset(in_root.string(), out_a.string(), cfg);

  const std::vector<GoldenScene> suite = golden_curation_suite();
  int expect_instances = 0, expect_kept = 0;
  std::map<std::string, int> expect_dropped;
  for (const GoldenScene& g : suite) {
    for (const GoldenExpectation& e : g.expected) {
      ++expect_instances;
      if (e.keep) {
        ++expect_kept;
      } else {
        ++expect_dropped[e.reason];
      }
    }
  }
  CHECK_EQ(report.scenes_read, static_cast<int>(suite.size()));
  CHECK_EQ(report.scenes_unreadable, 0);
  CHECK_EQ(report.instances_in, expect_instances);
  CHECK_EQ(report.kept, expect_kept);
  CHECK_EQ(report.kept + report.dropped_total(), report.instances_in);
  CHECK(report.dropped == expect_dropped);

  std::ifstream manifest(out_a / "manifest.jsonl");
  REQUIRE(manifest.good());
  int rows = 0, keep_rows = 0;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    ++rows;
    nlohmann::json row = nlohmann::json::parse(line);
    if (row.at("keep").get<bool>()) ++keep_rows;
  }
  CHECK_EQ(rows, expect_instances);
  CHECK_EQ(keep_rows, expect_kept);

  int kept_dirs = 0;
  for (const auto& entry : fs::directory_iterator(out_a / "kept")) {
    if (!entry.is_directory()) continue;
    ++kept_dirs;
    Tensor crop = core::read_png_rgb((entry.path() / "image.png").string());
    CHECK_EQ(crop.shape()[0], 96);
    CHECK_EQ(crop.shape()[1], 96);
  }
  CHECK_EQ(kept_dirs, expect_kept);

  const fs::path out_b = fresh_dir("svr_curation_out_b");
  curate_dataset(in_root.string(), out_b.string(), cfg);
  std::stringstream sa, sb;
  sa << std::ifstream(out_a / "manifest.jsonl").rdbuf();
  sb << std::ifstream(out_b / "manifest.jsonl").rdbuf();
  CHECK_EQ(sa.str(), sb.str());
  CHECK(sa.str().size() > 0);

  // A broken scene folder is skipped, counted, and changes nothing else.
  fs::create_directories(in_root / "zz_broken");
  std::ofstream(in_root / "zz_broken" / "meta.json") << "{ not json";
  const fs::path out_c = fresh_dir("svr_curation_out_c");
  CurationReport with_broken = curate_dataset(in_root.string(), out_c.string(), cfg);
  CHECK_EQ(with_broken.scenes_unreadable, 1);
  CHECK_EQ(with_broken.kept, report.kept);
  CHECK_EQ(with_broken.instances_in, report.instances_in);

  fs::remove_all(in_root);
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  fs::remove_all(out_c);
}

TEST_CASE("scene folders round-trip through disk") {
  SceneRecord scene = adjacent_plates_scene();
  scene.name = "roundtrip";
  scene.instances[0].confidence = 0.75;
  scene.instances[1].category = "crate";
  const fs::path dir = fresh_dir("svr_curation_scene") / "roundtrip";
  save_scene(scene, dir.string());

  SceneRecord back = load_scene(dir.string());
  CHECK_EQ(back.name, "roundtrip");
  REQUIRE_EQ(back.instances.size(), 2);
  CHECK_EQ(back.instances[0].id, "back");
  CHECK_EQ(back.instances[0].confidence, doctest::Approx(0.75));
  CHECK_EQ(back.instances[1].category, "crate");
  CHECK_EQ(pixel_mismatches(back.masks[0], scene.masks[0]), 0);
  CHECK_EQ(pixel_mismatches(back.masks[1], scene.masks[1]), 0);
  for (std::size_t i = 0; i < back.inverse_depth.numel(); ++i) {
    CHECK_LE(std::abs(back.inverse_depth[i] - scene.inverse_depth[i]), 1.0 / 65535.0);
  }

  // The same verdict falls out after the 16-bit depth round-trip.
  CurationConfig cfg;
  core::Rng a(5), b(5);
  CHECK_EQ(occlusion_verdict(scene, 0, cfg, a).reason,
           occlusion_verdict(back, 0, cfg, b).reason);
  fs::remove_all(fs::temp_directory_path() / "svr_curation_scene");
}
