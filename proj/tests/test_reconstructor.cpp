#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "reconstructor/model.hpp"

using namespace svr;
using ad::Tape;
using ad::Var;
using core::Rng;
using core::Tensor;
using reconstructor::BoundParams;
using reconstructor::ModelConfig;
using reconstructor::ReconstructorParams;

namespace {

ModelConfig tiny_config() {
  ModelConfig c;
  c.input_resolution = 16;
  c.patch_size = 4;
  c.triplane_size = 8;
  c.channels = 4;
  c.token_width = 32;
  c.n_blocks = 2;
  c.n_heads = 2;
  c.decoder_hidden = 16;
  c.decoder_layers = 1;
  return c;
}

Tensor random_image(int res, Rng& rng) {
  Tensor img({res, res, 3});
  for (size_t i = 0; i < img.numel(); ++i) img[i] = rng.uniform(0.0, 1.0);
  return img;
}

bool stores_equal(const ReconstructorParams& a, const ReconstructorParams& b) {
  if (a.store.size() != b.store.size()) return false;
  for (int i = 0; i < a.store.size(); ++i) {
    const Tensor& ta = a.store.at(i);
    const Tensor& tb = b.store.at(i);
    if (ta.shape() != tb.shape()) return false;
    for (size_t k = 0; k < ta.numel(); ++k)
      if (ta[k] != tb[k]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("config validation") {
  ModelConfig c = tiny_config();
  c.validate();
  c.input_resolution = 18;  // not divisible by patch 4
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny_config();
  c.triplane_size = 12;  // not a power of two
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny_config();
  c.token_width = 33;  // not divisible by heads
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = tiny_config();
  c.n_blocks = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config json round-trip") {
  const ModelConfig c = tiny_config();
  const ModelConfig back = ModelConfig::from_json(c.to_json());
  CHECK(back == c);
  CHECK_THROWS(ModelConfig::from_json("{\"input_resolution\": 16}"));
}

TEST_CASE("initialization is deterministic in the seed") {
  const ModelConfig c = tiny_config();
  const ReconstructorParams a = reconstructor::init_params(c, 123);
  const ReconstructorParams b = reconstructor::init_params(c, 123);
  const ReconstructorParams d = reconstructor::init_params(c, 124);
  CHECK(stores_equal(a, b));
  CHECK_FALSE(stores_equal(a, d));
  CHECK(a.all_finite());
  CHECK_GT(a.store.total_params(), 0u);
}

TEST_CASE("triplane shape follows the config") {
  ModelConfig c = tiny_config();
  c.triplane_size = 32;
  c.channels = 16;
  c.token_width = 16;
  c.n_heads = 2;
  c.n_blocks = 1;
  const ReconstructorParams p = reconstructor::init_params(c, 5);
  Rng rng(9);
  const Tensor img = random_image(c.input_resolution, rng);
  const renderfield::Triplane tri = reconstructor::reconstruct_plain(p, img);
  CHECK_EQ(tri.planes.shape(), std::vector<int>({3, 32, 32, 16}));
  CHECK(tri.planes.all_finite());
}

TEST_CASE("identical images give identical triplanes, different images differ") {
  const ModelConfig c = tiny_config();
  const ReconstructorParams p = reconstructor::init_params(c, 77);
  Rng rng(10);
  const Tensor img = random_image(c.input_resolution, rng);
  const renderfield::Triplane a = reconstructor::reconstruct_plain(p, img);
  const renderfield::Triplane b = reconstructor::reconstruct_plain(p, img);
  for (size_t i = 0; i < a.planes.numel(); ++i) CHECK_EQ(a.planes[i], b.planes[i]);

  Tensor img2 = img;
  img2[0] += 0.05;
  const renderfield::Triplane d = reconstructor::reconstruct_plain(p, img2);
  bool any_diff = false;
  for (size_t i = 0; i < a.planes.numel() && !any_diff; ++i)
    any_diff = a.planes[i] != d.planes[i];
  CHECK(any_diff);
}

TEST_CASE("wrong input resolution is rejected") {
  const ModelConfig c = tiny_config();
  const ReconstructorParams p = reconstructor::init_params(c, 1);
  CHECK_THROWS_AS(reconstructor::reconstruct_plain(p, Tensor({8, 8, 3})),
                  std::invalid_argument);
  CHECK_THROWS_AS(reconstructor::reconstruct_plain(p, Tensor({16, 16})),
                  std::invalid_argument);
}

TEST_CASE("triplane gradient w.r.t. input pixels matches finite differences") {
  const ModelConfig c = tiny_config();
  const ReconstructorParams p = reconstructor::init_params(c, 42);
  Rng rng(11);
  const Tensor img0 = random_image(c.input_resolution, rng);

  // random projection so the scalar depends on every plane entry
  Tensor dir({3, c.triplane_size, c.triplane_size, c.channels});
  for (size_t i = 0; i < dir.numel(); ++i) dir[i] = rng.uniform(-1.0, 1.0);

  auto loss_of = [&](const Tensor& img) {
    Tape t;
    const BoundParams bound = reconstructor::bind_params(t, p, false);
    Var planes = reconstructor::reconstruct(t, bound, t.constant(img));
    return t.val(ad::dot(t, ad::reshape(t, planes, {static_cast<int>(dir.numel())}),
                         t.constant(dir.reshaped({static_cast<int>(dir.numel())}))))[0];
  };

  Tape t;
  const BoundParams bound = reconstructor::bind_params(t, p, false);
  Var image = t.leaf(img0);
  Var planes = reconstructor::reconstruct(t, bound, image);
  Var loss = ad::dot(t, ad::reshape(t, planes, {static_cast<int>(dir.numel())}),
                     t.constant(dir.reshaped({static_cast<int>(dir.numel())})));
  t.backward(loss);
  const Tensor& g = t.grad(image);

  const double step = 1e-4;
  Tensor probe = img0;
  Rng pick(3);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const size_t i = static_cast<size_t>(pick.uniform_int(static_cast<int>(probe.numel())));
    const double keep = probe[i];
    probe[i] = keep + step;
    const double up = loss_of(probe);
    probe[i] = keep - step;
    const double dn = loss_of(probe);
    probe[i] = keep;
    const double fd = (up - dn) / (2.0 * step);
    if (std::abs(fd) < 1e-6) continue;  // skip numerically flat probes
    CHECK_LT(std::abs(g[i] - fd) / std::max(std::abs(fd), 1e-6), 1e-2);
    ++checked;
  }
  CHECK_GE(checked, 10);
}

TEST_CASE("triplane gradient w.r.t. parameters matches finite differences") {
  const ModelConfig c = tiny_config();
  ReconstructorParams p = reconstructor::init_params(c, 91);
  Rng rng(12);
  const Tensor img = random_image(c.input_resolution, rng);
  Tensor dir({3, c.triplane_size, c.triplane_size, c.channels});
  for (size_t i = 0; i < dir.numel(); ++i) dir[i] = rng.uniform(-1.0, 1.0);
  const Tensor dir_flat = dir.reshaped({static_cast<int>(dir.numel())});

  auto loss_now = [&]() {
    Tape t;
    const BoundParams bound = reconstructor::bind_params(t, p, false);
    Var planes = reconstructor::reconstruct(t, bound, t.constant(img));
    return t.val(ad::dot(t, ad::reshape(t, planes, {static_cast<int>(dir.numel())}),
                         t.constant(dir_flat)))[0];
  };

  Tape t;
  const BoundParams bound = reconstructor::bind_params(t, p, true);
  Var planes = reconstructor::reconstruct(t, bound, t.constant(img));
  t.backward(ad::dot(t, ad::reshape(t, planes, {static_cast<int>(dir.numel())}),
                     t.constant(dir_flat)));

  const double step = 1e-4;
  Rng pick(6);
  for (const char* name : {"embed.w", "queries", "blk0.attn.wq", "blk1.mlp.w2", "head.w"}) {
    const int pi = p.store.index(name);
    const Tensor& g = t.grad(bound.vars[static_cast<size_t>(pi)]);
    Tensor& w = p.store.at(pi);
    for (int trial = 0; trial < 4; ++trial) {
      const size_t i = static_cast<size_t>(pick.uniform_int(static_cast<int>(w.numel())));
      const double keep = w[i];
      w[i] = keep + step;
      const double up = loss_now();
      w[i] = keep - step;
      const double dn = loss_now();
      w[i] = keep;
      const double fd = (up - dn) / (2.0 * step);
      CHECK_LT(std::abs(g[i] - fd), 1e-2 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("decoder tensors round-trip out of the parameter store") {
  const ModelConfig c = tiny_config();
  const ReconstructorParams p = reconstructor::init_params(c, 4);
  renderfield::FieldDecoder dec;
  reconstructor::decoder_from_params(p, dec);
  REQUIRE_EQ(dec.weights.size(), static_cast<size_t>(c.decoder_layers + 1));
  CHECK_EQ(dec.in_channels(), c.channels);
  CHECK_EQ(dec.weights.back().dim(1), 4);
  // a triplane + this decoder renders finite images
  Rng rng(13);
  const renderfield::Triplane tri =
      reconstructor::reconstruct_plain(p, random_image(c.input_resolution, rng));
  renderfield::RenderSettings s;
  s.resolution = 8;
  s.samples_per_ray = 8;
  const renderfield::RenderedView v =
      renderfield::render_plain(tri, dec, geometry::canonical_pose(1.8, 40.0), s, nullptr);
  CHECK(v.rgb.all_finite());
  CHECK(v.alpha.all_finite());
}
