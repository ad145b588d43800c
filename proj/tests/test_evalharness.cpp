#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "core/image.hpp"
#include "core/rng.hpp"
#include "dataworld/crop.hpp"
#include "dataworld/datasets.hpp"
#include "evalharness/metrics.hpp"
#include "evalharness/suites.hpp"
#include "geometry/pose.hpp"
#include "reconstructor/model.hpp"
#include "renderfield/render.hpp"
#include "selftrain/embedder.hpp"
#include "selftrain/perceptual.hpp"

using namespace svr;
using core::Tensor;
using namespace svr::evalharness;
namespace fs = std::filesystem;

namespace {

// Rotation-invariant soft ball with radial shading: every orbit view of it is
// the same image, which makes round-trip protocols exact up to sampling.
class SphereField : public renderfield::DensityColorField {
 public:
  void eval(const double* points, int n, double* sigma, double* rgb) const override {
    for (int i = 0; i < n; ++i) {
      const double x = points[3 * i], y = points[3 * i + 1], z = points[3 * i + 2];
      const double r = std::sqrt(x * x + y * y + z * z);
      sigma[i] = 40.0 / (1.0 + std::exp(14.0 * (r / 0.35 - 1.0)));
      const double t = std::min(r / 0.35, 1.0);
      rgb[3 * i] = 0.85 - 0.5 * t;
      rgb[3 * i + 1] = 0.25 + 0.5 * t;
      rgb[3 * i + 2] = 0.55;
    }
  }
};

class ZeroField : public renderfield::DensityColorField {
 public:
  void eval(const double*, int n, double* sigma, double* rgb) const override {
    for (int i = 0; i < n; ++i) {
      sigma[i] = 0.0;
      rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = 0.0;
    }
  }
};

Tensor random_image(int h, int w, uint64_t seed) {
  Tensor img({h, w, 3});
  core::Rng rng(seed);
  for (std::size_t i = 0; i < img.numel(); ++i) img[i] = rng.uniform();
  return img;
}

renderfield::RenderSettings fast_settings(int resolution) {
  renderfield::RenderSettings s;
  s.resolution = resolution;
  s.samples_per_ray = 32;
  return s;
}

Tensor sphere_input(int resolution) {
  SphereField field;
  geometry::CameraRig rig;
  const geometry::CameraPose pose = geometry::compose_relative({0.0, 0.0}, rig);
  renderfield::RenderedView view =
      renderfield::render_field(field, pose, fast_settings(resolution));
  return renderfield::composite_background(view, renderfield::kGray);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  REQUIRE(a.shape() == b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("psnr closed-form values and cap") {
  Tensor a = random_image(16, 16, 5);
  CHECK_EQ(psnr(a, a), kPsnrCap);

  Tensor b = a;
  for (std::size_t i = 0; i < b.numel(); ++i) b[i] = a[i] * 0.0;
  Tensor ones({16, 16, 3});
  Tensor zeros({16, 16, 3});
  for (std::size_t i = 0; i < ones.numel(); ++i) ones[i] = 1.0;
  CHECK_EQ(psnr(ones, zeros), doctest::Approx(0.0).epsilon(1e-12));

  Tensor shifted = a;
  for (std::size_t i = 0; i < shifted.numel(); ++i) shifted[i] = a[i] + 0.1;
  CHECK_EQ(psnr(a, shifted), doctest::Approx(20.0).epsilon(1e-9));

  Tensor other({8, 8, 3});
  CHECK_THROWS_AS(psnr(a, other), std::invalid_argument);
}

TEST_CASE("ssim fixed points and structural sensitivity") {
  Tensor a = random_image(32, 32, 9);
  CHECK_EQ(ssim(a, a), 1.0);

  Tensor constant({24, 24, 3});
  for (std::size_t i = 0; i < constant.numel(); ++i) constant[i] = 0.37;
  CHECK_EQ(ssim(constant, constant), 1.0);

  Tensor negative = a;
  for (std::size_t i = 0; i < negative.numel(); ++i) negative[i] = 1.0 - a[i];
  CHECK_LT(ssim(a, negative), 1.0);

  Tensor small({8, 8});
  CHECK_THROWS_AS(ssim(small, small), std::invalid_argument);
  Tensor other({16, 16, 3});
  CHECK_THROWS_AS(ssim(a, other), std::invalid_argument);
}

TEST_CASE("perceptual distance wrapper") {
  selftrain::RandomFeaturePerceptual backend;
  Tensor a = random_image(24, 24, 11);
  CHECK_EQ(perceptual_distance(a, a, &backend), 0.0);

  Tensor b = random_image(24, 24, 12);
  CHECK_EQ(perceptual_distance(a, b, &backend), perceptual_distance(b, a, &backend));
  CHECK_GT(perceptual_distance(a, b, &backend), 0.0);

  core::Rng noise_rng(77);
  Tensor n1 = a, n2 = a, n3 = a;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double n = noise_rng.normal();
    n1[i] = a[i] + 0.02 * n;
    n2[i] = a[i] + 0.05 * n;
    n3[i] = a[i] + 0.12 * n;
  }
  const double d1 = perceptual_distance(a, n1, &backend);
  const double d2 = perceptual_distance(a, n2, &backend);
  const double d3 = perceptual_distance(a, n3, &backend);
  CHECK_LT(d1, d2);
  CHECK_LT(d2, d3);

  CHECK_THROWS_AS(perceptual_distance(a, b, nullptr), std::runtime_error);
}

TEST_CASE("pose schedules match the protocol") {
  const auto sem = semantic_pose_schedule();
  REQUIRE_EQ(sem.size(), 7);
  CHECK_EQ(sem[0].azimuth_deg, 0.0);
  CHECK_EQ(sem[1].azimuth_deg, doctest::Approx(51.428571428).epsilon(1e-9));
  for (const auto& p : sem) {
    CHECK_EQ(p.elevation_deg, 0.0);
    CHECK(p.valid());
  }
  for (std::size_t k = 1; k < sem.size(); ++k) {
    double gap = sem[k].azimuth_deg - sem[k - 1].azimuth_deg;
    while (gap < 0.0) gap += 360.0;
    CHECK_EQ(gap, doctest::Approx(360.0 / 7.0).epsilon(1e-9));
  }

  const auto con = consistency_pose_schedule();
  REQUIRE_EQ(con.size(), 13);
  const double az[] = {0, 30, 60, -30, -60, 30, 60, -30, -60, 30, 60, -30, -60};
  const double el[] = {0, 0, 0, 0, 0, 30, 30, 30, 30, 60, 60, 60, 60};
  for (int i = 0; i < 13; ++i) {
    CHECK_EQ(con[i].azimuth_deg, az[i]);
    CHECK_EQ(con[i].elevation_deg, el[i]);
  }
}

TEST_CASE("semantic suite on a symmetric oracle") {
  SphereField field;
  geometry::CameraRig rig;
  FieldEvalModel model(field, rig);
  selftrain::FallbackEmbedder embedder;
  selftrain::RandomFeaturePerceptual perceptual;
  EvalContext ctx;
  ctx.embedder = &embedder;
  ctx.perceptual = &perceptual;
  ctx.settings = fast_settings(48);
  ctx.config_hash = 0xabcd;

  std::vector<EvalInstance> instances;
  instances.push_back({"ball", sphere_input(48)});
  MetricsReport report = semantic_similarity_suite(model, instances, ctx);

  CHECK_EQ(report.suite, "semantic");
  CHECK_EQ(report.config_hash, 0xabcd);
  REQUIRE_EQ(report.rows.size(), 1);
  CHECK_GE(report.rows[0].values.at("embedder_similarity"), 0.99);
  CHECK_LE(report.rows[0].values.at("perceptual"), 1e-4);
  CHECK_EQ(report.views_per_instance, 7);

  MetricsReport empty = semantic_similarity_suite(model, {}, ctx);
  CHECK(empty.rows.empty());
  CHECK(empty.aggregate.empty());

  EvalContext broken = ctx;
  broken.embedder = nullptr;
  CHECK_THROWS_AS(semantic_similarity_suite(model, instances, broken), std::runtime_error);
}

TEST_CASE("self-consistency suite closes the loop on the oracle") {
  SphereField field;
  geometry::CameraRig rig;
  FieldEvalModel model(field, rig);
  selftrain::RandomFeaturePerceptual perceptual;
  EvalContext ctx;
  ctx.perceptual = &perceptual;
  ctx.settings = fast_settings(48);

  std::vector<EvalInstance> instances;
  instances.push_back({"ball", sphere_input(48)});
  MetricsReport report = self_consistency_suite(model, instances, ctx);

  CHECK_EQ(report.suite, "self-consistency");
  REQUIRE_EQ(report.poses.size(), 13);
  CHECK_EQ(report.poses[0].azimuth_deg, 0.0);
  CHECK_EQ(report.crop_ratio, dataworld::kEvalExpandRatio);
  CHECK_EQ(report.views_per_instance, 13);
  REQUIRE_EQ(report.rows.size(), 1);
  CHECK_GE(report.rows[0].values.at("psnr"), 40.0);
  CHECK_GE(report.rows[0].values.at("ssim"), 0.99);
  CHECK_EQ(report.aggregate.at("psnr"), report.rows[0].values.at("psnr"));
}

TEST_CASE("nvs suite scores sealed views") {
  const fs::path root = fs::temp_directory_path() / "svr_eval_nvs";
  fs::remove_all(root);
  dataworld::DatasetConfig dcfg;
  dcfg.resolution = 48;
  dcfg.samples_per_ray = 32;
  dcfg.n_eval_views = 5;
  dataworld::build_pseudo_real_set(root.string(), 2, dcfg, 404);
  std::vector<dataworld::SealedInstance> instances =
      dataworld::load_sealed_eval_set(root.string());
  REQUIRE_EQ(instances.size(), 2);

  selftrain::RandomFeaturePerceptual perceptual;
  EvalContext ctx;
  ctx.perceptual = &perceptual;
  ctx.settings = fast_settings(48);
  ctx.settings.samples_per_ray = dcfg.samples_per_ray;

  SUBCASE("oracle model on its own data") {
    for (int i = 0; i < 2; ++i) {
      dataworld::ToyShape shape = dataworld::pseudo_real_shape(404, i, dcfg);
      FieldEvalModel model(shape, dcfg.rig);
      MetricsReport report = nvs_suite(model, {instances[static_cast<std::size_t>(i)]}, ctx);
      REQUIRE_EQ(report.rows.size(), 1);
      CHECK_EQ(report.views_per_instance, 5);
      CHECK_GE(report.rows[0].values.at("psnr"), 40.0);
    }
  }

  SUBCASE("zero-density model reduces to the all-gray baseline") {
    ZeroField zero;
    FieldEvalModel model(zero, dcfg.rig);
    MetricsReport report = nvs_suite(model, instances, ctx);
    Tensor gray({48, 48, 3});
    for (std::size_t i = 0; i < gray.numel(); ++i) gray[i] = 0.5;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      double acc = 0.0;
      for (const Tensor& view : instances[i].views) acc += psnr(gray, view);
      CHECK_EQ(report.rows[i].values.at("psnr"),
               doctest::Approx(acc / instances[i].views.size()).epsilon(1e-12));
    }
  }

  SUBCASE("missing sealed views are a configuration error") {
    std::vector<dataworld::SealedInstance> broken = instances;
    broken[0].views.clear();
    SphereField field;
    FieldEvalModel model(field, dcfg.rig);
    CHECK_THROWS_AS(nvs_suite(model, broken, ctx), std::runtime_error);
  }

  fs::remove_all(root);
}

TEST_CASE("reports serialize, re-aggregate, and format") {
  SphereField field;
  geometry::CameraRig rig;
  FieldEvalModel model(field, rig);
  selftrain::RandomFeaturePerceptual perceptual;
  EvalContext ctx;
  ctx.perceptual = &perceptual;
  ctx.settings = fast_settings(32);
  ctx.config_hash = 31337;

  std::vector<EvalInstance> instances;
  instances.push_back({"a", sphere_input(32)});
  instances.push_back({"b", sphere_input(32)});
  MetricsReport report = self_consistency_suite(model, instances, ctx);

  for (const auto& [key, value] : report.aggregate) {
    double acc = 0.0;
    for (const InstanceRow& row : report.rows) acc += row.values.at(key);
    CHECK_EQ(value, doctest::Approx(acc / report.rows.size()).epsilon(1e-15));
  }

  const std::string text = report.to_json();
  MetricsReport parsed = MetricsReport::from_json(text);
  CHECK_EQ(parsed.suite, report.suite);
  CHECK_EQ(parsed.config_hash, report.config_hash);
  CHECK_EQ(parsed.rows.size(), report.rows.size());
  CHECK_EQ(parsed.poses.size(), report.poses.size());
  CHECK_EQ(parsed.crop_ratio, report.crop_ratio);
  CHECK(parsed.fid_omitted);
  CHECK_EQ(parsed.aggregate.at("psnr"), report.aggregate.at("psnr"));
  CHECK_EQ(parsed.rows[1].values.at("ssim"), report.rows[1].values.at("ssim"));

  const std::string table = report.summary_table();
  CHECK_NE(table.find("PSNR"), std::string::npos);
  CHECK_NE(table.find("mean"), std::string::npos);
  CHECK_NE(table.find("FID: omitted"), std::string::npos);

  MetricsReport again = self_consistency_suite(model, instances, ctx);
  CHECK_EQ(again.to_json(), text);
}

TEST_CASE("reconstructor-backed eval model matches the plain pipeline") {
  reconstructor::ModelConfig mcfg;
  mcfg.input_resolution = 16;
  mcfg.patch_size = 4;
  mcfg.triplane_size = 8;
  mcfg.channels = 4;
  mcfg.token_width = 32;
  mcfg.n_blocks = 2;
  mcfg.n_heads = 2;
  mcfg.decoder_hidden = 16;
  mcfg.decoder_layers = 1;
  reconstructor::ReconstructorParams params = reconstructor::init_params(mcfg, 21);

  geometry::CameraRig rig;
  ReconstructorEvalModel model(params, rig);
  Tensor input = random_image(16, 16, 31);

  auto recon = model.reconstruct(input);
  const geometry::RelativePose delta{25.0, -10.0};
  renderfield::RenderSettings settings = fast_settings(16);
  settings.samples_per_ray = 8;
  renderfield::RenderedView via_model = recon->render(delta, settings);

  renderfield::Triplane planes = reconstructor::reconstruct_plain(params, input);
  renderfield::FieldDecoder dec;
  reconstructor::decoder_from_params(params, dec);
  renderfield::RenderedView direct = renderfield::render_plain(
      planes, dec, geometry::compose_relative(delta, rig), settings, nullptr);

  CHECK_EQ(max_abs_diff(via_model.rgb, direct.rgb), 0.0);
  CHECK_EQ(max_abs_diff(via_model.alpha, direct.alpha), 0.0);

  // An input at a different resolution is resized into the model, not rejected.
  auto recon2 = model.reconstruct(random_image(24, 24, 32));
  renderfield::RenderedView v2 = recon2->render(delta, settings);
  CHECK_EQ(v2.rgb.shape()[0], 16);
}
