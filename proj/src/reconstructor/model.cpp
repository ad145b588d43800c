#include "reconstructor/model.hpp"

#include <json.hpp>
#include <stdexcept>

namespace svr::reconstructor {

using ad::Tape;
using ad::Var;
using core::Rng;
using core::Tensor;

namespace {

bool power_of_two(int x) { return x > 0 && (x & (x - 1)) == 0; }

Tensor normal_init(std::vector<int> shape, double std_dev, Rng& rng) {
  Tensor t(std::move(shape));
  for (size_t i = 0; i < t.numel(); ++i) t[i] = rng.normal() * std_dev;
  return t;
}

std::string blk(int b, const char* suffix) {
  return "blk" + std::to_string(b) + "." + suffix;
}

}  // namespace

void ModelConfig::validate() const {
  if (input_resolution < 8 || patch_size < 1 || triplane_size < 2 || channels < 1 ||
      token_width < 1 || n_blocks < 1 || n_heads < 1 || decoder_hidden < 1 ||
      decoder_layers < 1)
    throw std::invalid_argument("ModelConfig: sizes must be positive");
  if (input_resolution % patch_size != 0)
    throw std::invalid_argument("ModelConfig: input resolution not divisible by patch size");
  if (!power_of_two(triplane_size))
    throw std::invalid_argument("ModelConfig: triplane size must be a power of two");
  if (token_width % n_heads != 0)
    throw std::invalid_argument("ModelConfig: token width not divisible by head count");
}

std::string ModelConfig::to_json() const {
  nlohmann::json j;
  j["input_resolution"] = input_resolution;
  j["patch_size"] = patch_size;
  j["triplane_size"] = triplane_size;
  j["channels"] = channels;
  j["token_width"] = token_width;
  j["n_blocks"] = n_blocks;
  j["n_heads"] = n_heads;
  j["decoder_hidden"] = decoder_hidden;
  j["decoder_layers"] = decoder_layers;
  return j.dump(2);
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ModelConfig c;
  c.input_resolution = j.at("input_resolution").get<int>();
  c.patch_size = j.at("patch_size").get<int>();
  c.triplane_size = j.at("triplane_size").get<int>();
  c.channels = j.at("channels").get<int>();
  c.token_width = j.at("token_width").get<int>();
  c.n_blocks = j.at("n_blocks").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.decoder_hidden = j.at("decoder_hidden").get<int>();
  c.decoder_layers = j.at("decoder_layers").get<int>();
  c.validate();
  return c;
}

bool ModelConfig::operator==(const ModelConfig& o) const {
  return input_resolution == o.input_resolution && patch_size == o.patch_size &&
         triplane_size == o.triplane_size && channels == o.channels &&
         token_width == o.token_width && n_blocks == o.n_blocks && n_heads == o.n_heads &&
         decoder_hidden == o.decoder_hidden && decoder_layers == o.decoder_layers;
}

ReconstructorParams init_params(const ModelConfig& config, uint64_t seed) {
  config.validate();
  ReconstructorParams p;
  p.config = config;
  Rng rng(core::mix64(seed, 0x7265636f6e));

  const int d = config.token_width;
  const int patch_dim = config.patch_size * config.patch_size * 3;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  p.store.add("embed.w", normal_init({patch_dim, d}, 1.0 / std::sqrt(static_cast<double>(patch_dim)), rng));
  p.store.add("embed.b", Tensor({d}));
  p.store.add("pos_img", normal_init({config.n_image_tokens(), d}, 0.02, rng));
  p.store.add("queries", normal_init({config.n_query_tokens(), d}, 0.02, rng));
  p.store.add("ctxln.gain", Tensor({d}, 1.0));
  p.store.add("ctxln.bias", Tensor({d}));

  for (int b = 0; b < config.n_blocks; ++b) {
    p.store.add(blk(b, "ln1.gain"), Tensor({d}, 1.0));
    p.store.add(blk(b, "ln1.bias"), Tensor({d}));
    p.store.add(blk(b, "attn.wq"), normal_init({d, d}, inv_sqrt_d, rng));
    p.store.add(blk(b, "attn.bq"), Tensor({d}));
    p.store.add(blk(b, "attn.wk"), normal_init({d, d}, inv_sqrt_d, rng));
    p.store.add(blk(b, "attn.bk"), Tensor({d}));
    p.store.add(blk(b, "attn.wv"), normal_init({d, d}, inv_sqrt_d, rng));
    p.store.add(blk(b, "attn.bv"), Tensor({d}));
    p.store.add(blk(b, "attn.wo"), normal_init({d, d}, inv_sqrt_d, rng));
    p.store.add(blk(b, "attn.bo"), Tensor({d}));
    p.store.add(blk(b, "ln2.gain"), Tensor({d}, 1.0));
    p.store.add(blk(b, "ln2.bias"), Tensor({d}));
    p.store.add(blk(b, "mlp.w1"), normal_init({d, 4 * d}, inv_sqrt_d, rng));
    p.store.add(blk(b, "mlp.b1"), Tensor({4 * d}));
    p.store.add(blk(b, "mlp.w2"),
                normal_init({4 * d, d}, 1.0 / std::sqrt(4.0 * d), rng));
    p.store.add(blk(b, "mlp.b2"), Tensor({d}));
  }

  p.store.add("lnf.gain", Tensor({d}, 1.0));
  p.store.add("lnf.bias", Tensor({d}));
  p.store.add("head.w", normal_init({d, 4 * config.channels}, inv_sqrt_d, rng));
  p.store.add("head.b", Tensor({4 * config.channels}));

  renderfield::FieldDecoder dec = renderfield::FieldDecoder::init(
      config.channels, config.decoder_hidden, config.decoder_layers, rng);
  for (size_t l = 0; l < dec.weights.size(); ++l) {
    const std::string tag = "dec" + std::to_string(l);
    p.store.add(tag + ".w", std::move(dec.weights[l]));
    p.store.add(tag + ".b", std::move(dec.biases[l]));
  }
  return p;
}

BoundParams bind_params(Tape& t, const ReconstructorParams& params, bool as_leaf) {
  BoundParams b;
  b.params = &params;
  b.vars.reserve(static_cast<size_t>(params.store.size()));
  for (int i = 0; i < params.store.size(); ++i)
    b.vars.push_back(as_leaf ? t.leaf(params.store.at(i)) : t.constant(params.store.at(i)));
  return b;
}

renderfield::DecoderVars BoundParams::decoder(Tape&) const {
  renderfield::DecoderVars d;
  for (int l = 0; l <= params->config.decoder_layers; ++l) {
    const std::string tag = "dec" + std::to_string(l);
    d.weights.push_back(var(tag + ".w"));
    d.biases.push_back(var(tag + ".b"));
  }
  return d;
}

Var reconstruct(Tape& t, const BoundParams& bound, Var image) {
  const ModelConfig& cfg = bound.params->config;
  const Tensor& img = t.val(image);
  if (img.rank() != 3 || img.dim(0) != cfg.input_resolution ||
      img.dim(1) != cfg.input_resolution || img.dim(2) != 3)
    throw std::invalid_argument("reconstruct: image must be (R,R,3) at the configured resolution");

  Var patches = ad::im2col(t, image, cfg.patch_size, cfg.patch_size, cfg.patch_size, 0);
  Var tokens = ad::linear(t, patches, bound.var("embed.w"), bound.var("embed.b"));
  tokens = ad::add(t, tokens, bound.var("pos_img"));
  Var ctx = ad::layernorm_rows(t, tokens, bound.var("ctxln.gain"), bound.var("ctxln.bias"));

  const int heads = cfg.n_heads;
  const int hd = cfg.token_width / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

  Var x = bound.var("queries");
  for (int b = 0; b < cfg.n_blocks; ++b) {
    Var xin = ad::layernorm_rows(t, x, bound.var(blk(b, "ln1.gain")), bound.var(blk(b, "ln1.bias")));
    Var q = ad::linear(t, xin, bound.var(blk(b, "attn.wq")), bound.var(blk(b, "attn.bq")));
    Var k = ad::linear(t, ctx, bound.var(blk(b, "attn.wk")), bound.var(blk(b, "attn.bk")));
    Var v = ad::linear(t, ctx, bound.var(blk(b, "attn.wv")), bound.var(blk(b, "attn.bv")));
    std::vector<Var> head_outs;
    head_outs.reserve(static_cast<size_t>(heads));
    for (int h = 0; h < heads; ++h) {
      Var qh = ad::slice_cols(t, q, h * hd, hd);
      Var kh = ad::slice_cols(t, k, h * hd, hd);
      Var vh = ad::slice_cols(t, v, h * hd, hd);
      Var scores = ad::scale(t, ad::matmul(t, qh, kh, false, true), scale);
      Var attn = ad::softmax_rows(t, scores);
      head_outs.push_back(ad::matmul(t, attn, vh, false, false));
    }
    Var merged = heads == 1 ? head_outs[0] : ad::concat_cols(t, head_outs);
    Var out = ad::linear(t, merged, bound.var(blk(b, "attn.wo")), bound.var(blk(b, "attn.bo")));
    x = ad::add(t, x, out);

    Var xm = ad::layernorm_rows(t, x, bound.var(blk(b, "ln2.gain")), bound.var(blk(b, "ln2.bias")));
    Var h1 = ad::gelu(t, ad::linear(t, xm, bound.var(blk(b, "mlp.w1")), bound.var(blk(b, "mlp.b1"))));
    Var h2 = ad::linear(t, h1, bound.var(blk(b, "mlp.w2")), bound.var(blk(b, "mlp.b2")));
    x = ad::add(t, x, h2);
  }

  x = ad::layernorm_rows(t, x, bound.var("lnf.gain"), bound.var("lnf.bias"));
  Var tok = ad::linear(t, x, bound.var("head.w"), bound.var("head.b"));
  return ad::tokens_to_planes(t, tok, cfg.triplane_size, cfg.channels);
}

renderfield::Triplane reconstruct_plain(const ReconstructorParams& params, const Tensor& image) {
  Tape t;
  const BoundParams bound = bind_params(t, params, false);
  Var planes = reconstruct(t, bound, t.constant(image));
  return renderfield::Triplane{t.val(planes)};
}

void decoder_from_params(const ReconstructorParams& params, renderfield::FieldDecoder& dec) {
  dec.weights.clear();
  dec.biases.clear();
  for (int l = 0; l <= params.config.decoder_layers; ++l) {
    const std::string tag = "dec" + std::to_string(l);
    dec.weights.push_back(params.store.get(tag + ".w"));
    dec.biases.push_back(params.store.get(tag + ".b"));
  }
}

}  // namespace svr::reconstructor
