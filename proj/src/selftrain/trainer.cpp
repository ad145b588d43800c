#include "selftrain/trainer.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <stdexcept>

#include "core/serialize.hpp"

namespace svr::selftrain {

using core::Rng;
using core::Tensor;

namespace {

constexpr uint32_t kCheckpointMagic = 0x53565243;  // "CRVS"
constexpr uint32_t kCheckpointVersion = 1;
constexpr uint64_t kTrainStream = 0x747261696e;
constexpr uint64_t kSynthStream = 0x73796e7468;
constexpr uint64_t kRealStream = 0x7265616c;

std::vector<int> epoch_perm(uint64_t seed, uint64_t stream, int n, long epoch) {
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(core::mix64(seed, stream, static_cast<uint64_t>(epoch)));
  for (int i = n - 1; i > 0; --i) {
    const int j = rng.uniform_int(i + 1);
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }
  return perm;
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  optim.validate();
  weights.validate();
  if (j_max < 1) throw std::invalid_argument("TrainConfig: j_max must be >= 1");
  if (batch_synth < 1) throw std::invalid_argument("TrainConfig: need a synthetic batch half");
  if (batch_real < 0) throw std::invalid_argument("TrainConfig: negative real batch");
  if (checkpoint_every < 0) throw std::invalid_argument("TrainConfig: negative checkpoint period");
  if (theta_min_deg > theta_max_deg || phi_min_deg > phi_max_deg)
    throw std::invalid_argument("TrainConfig: curriculum endpoints must satisfy min <= max");
  if (flags.semantic_views < 1)
    throw std::invalid_argument("TrainConfig: need at least one semantic view");
  if (setup.render.resolution < 8 || setup.render.samples_per_ray < 2)
    throw std::invalid_argument("TrainConfig: render settings too small");
  if (setup.rig.radius <= 0.0 || setup.rig.fov_deg <= 0.0 || setup.rig.fov_deg >= 180.0)
    throw std::invalid_argument("TrainConfig: invalid camera rig");
}

std::string TrainConfig::to_json() const {
  nlohmann::json j;
  j["model"] = nlohmann::json::parse(model.to_json());
  j["optim"] = {{"lr_max", optim.lr_max},       {"warmup", optim.warmup},
                {"beta1", optim.beta1},         {"beta2", optim.beta2},
                {"eps", optim.eps},             {"weight_decay", optim.weight_decay},
                {"clip_norm", optim.clip_norm}};
  j["weights"] = {{"lambda_perceptual", weights.lambda_perceptual},
                  {"lambda_in", weights.lambda_in},
                  {"lambda_pix", weights.lambda_pix},
                  {"lambda_sem", weights.lambda_sem}};
  j["flags"] = {{"naive_semantic", flags.naive_semantic},
                {"e2e_cycle", flags.e2e_cycle},
                {"no_curriculum", flags.no_curriculum},
                {"semantic_views", flags.semantic_views}};
  j["setup"] = {{"radius", setup.rig.radius},
                {"fov_deg", setup.rig.fov_deg},
                {"render_resolution", setup.render.resolution},
                {"samples_per_ray", setup.render.samples_per_ray},
                {"near", setup.render.near},
                {"far", setup.render.far},
                {"stratified", setup.render.sampling == renderfield::DepthSampling::stratified}};
  j["j_max"] = j_max;
  j["curriculum"] = {{"theta_min", theta_min_deg},
                     {"theta_max", theta_max_deg},
                     {"phi_min", phi_min_deg},
                     {"phi_max", phi_max_deg}};
  j["batch_synth"] = batch_synth;
  j["batch_real"] = batch_real;
  j["checkpoint_every"] = checkpoint_every;
  j["seed"] = seed;
  return j.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  TrainConfig c;
  c.model = reconstructor::ModelConfig::from_json(j.at("model").dump());
  const auto& o = j.at("optim");
  c.optim.lr_max = o.at("lr_max").get<double>();
  c.optim.warmup = o.at("warmup").get<long>();
  c.optim.beta1 = o.at("beta1").get<double>();
  c.optim.beta2 = o.at("beta2").get<double>();
  c.optim.eps = o.at("eps").get<double>();
  c.optim.weight_decay = o.at("weight_decay").get<double>();
  c.optim.clip_norm = o.at("clip_norm").get<double>();
  const auto& w = j.at("weights");
  c.weights.lambda_perceptual = w.at("lambda_perceptual").get<double>();
  c.weights.lambda_in = w.at("lambda_in").get<double>();
  c.weights.lambda_pix = w.at("lambda_pix").get<double>();
  c.weights.lambda_sem = w.at("lambda_sem").get<double>();
  const auto& f = j.at("flags");
  c.flags.naive_semantic = f.at("naive_semantic").get<bool>();
  c.flags.e2e_cycle = f.at("e2e_cycle").get<bool>();
  c.flags.no_curriculum = f.at("no_curriculum").get<bool>();
  c.flags.semantic_views = f.at("semantic_views").get<int>();
  const auto& s = j.at("setup");
  c.setup.rig.radius = s.at("radius").get<double>();
  c.setup.rig.fov_deg = s.at("fov_deg").get<double>();
  c.setup.render.resolution = s.at("render_resolution").get<int>();
  c.setup.render.samples_per_ray = s.at("samples_per_ray").get<int>();
  c.setup.render.near = s.at("near").get<double>();
  c.setup.render.far = s.at("far").get<double>();
  c.setup.render.sampling = s.at("stratified").get<bool>() ? renderfield::DepthSampling::stratified
                                                           : renderfield::DepthSampling::midpoint;
  c.j_max = j.at("j_max").get<long>();
  const auto& cu = j.at("curriculum");
  c.theta_min_deg = cu.at("theta_min").get<double>();
  c.theta_max_deg = cu.at("theta_max").get<double>();
  c.phi_min_deg = cu.at("phi_min").get<double>();
  c.phi_max_deg = cu.at("phi_max").get<double>();
  c.batch_synth = j.at("batch_synth").get<int>();
  c.batch_real = j.at("batch_real").get<int>();
  c.checkpoint_every = j.at("checkpoint_every").get<long>();
  c.seed = j.at("seed").get<uint64_t>();
  c.validate();
  return c;
}

TrainState::TrainState(const TrainConfig& cfg)
    : params(reconstructor::init_params(cfg.model, cfg.seed)),
      opt(cfg.optim, params.store),
      rng(core::mix64(cfg.seed, kTrainStream)) {
  curriculum.j = 0;
  curriculum.j_max = cfg.j_max;
  curriculum.theta_min_deg = cfg.theta_min_deg;
  curriculum.theta_max_deg = cfg.theta_max_deg;
  curriculum.phi_min_deg = cfg.phi_min_deg;
  curriculum.phi_max_deg = cfg.phi_max_deg;
}

StepMetrics train_step(TrainState& state, const TrainConfig& cfg,
                       const std::vector<SynthSample>& synth_batch,
                       const std::vector<RealSample>& real_batch,
                       const SemanticEmbedder& embedder, const PerceptualBackend* perceptual) {
  if (synth_batch.empty()) throw std::invalid_argument("train_step: empty synthetic batch");
  const bool real_active = cfg.weights.lambda_in > 0.0 || cfg.weights.lambda_pix > 0.0 ||
                           cfg.weights.lambda_sem > 0.0;
  if (real_batch.empty() && real_active)
    throw std::invalid_argument("train_step: empty single-view batch");

  StepMetrics metrics;
  metrics.j = state.curriculum.j;
  const auto [theta, phi] = curriculum_bounds(state.curriculum);
  metrics.theta_bound = theta;
  metrics.phi_bound = phi;

  std::vector<Tensor> grads;
  grads.reserve(static_cast<size_t>(state.params.store.size()));
  for (int i = 0; i < state.params.store.size(); ++i)
    grads.emplace_back(state.params.store.at(i).shape());

  auto accumulate = [&](ad::Tape& t, const reconstructor::BoundParams& bound) {
    for (size_t i = 0; i < bound.vars.size(); ++i) {
      if (!t.has_grad(bound.vars[i])) continue;
      const Tensor& g = t.grad(bound.vars[i]);
      Tensor& acc = grads[i];
      for (size_t k = 0; k < acc.numel(); ++k) acc[k] += g[k];
    }
  };

  const double synth_scale = 1.0 / static_cast<double>(synth_batch.size());
  for (const SynthSample& sample : synth_batch) {
    ad::Tape t;
    const reconstructor::BoundParams bound = reconstructor::bind_params(t, state.params, true);
    ad::Var loss = supervised_loss(t, bound, sample, cfg.weights, cfg.setup, perceptual);
    metrics.loss_synth += t.val(loss)[0] * synth_scale;
    ad::Var scaled = ad::scale(t, loss, synth_scale);
    t.backward(scaled);
    accumulate(t, bound);
  }

  if (!real_batch.empty() && real_active) {
    const double real_scale = 1.0 / static_cast<double>(real_batch.size());
    for (const RealSample& sample : real_batch) {
      ad::Tape t;
      const reconstructor::BoundParams bound = reconstructor::bind_params(t, state.params, true);
      SelfTrainParts parts;
      ad::Var loss = self_training_loss(t, bound, sample, state.curriculum, embedder,
                                        cfg.weights, state.rng, cfg.flags, cfg.setup, &parts);
      metrics.loss_self += parts.total * real_scale;
      metrics.loss_in += parts.input_view * real_scale;
      metrics.loss_pix += parts.cycle * real_scale;
      metrics.loss_sem += parts.semantic * real_scale;
      if (t.requires_grad(loss)) {
        ad::Var scaled = ad::scale(t, loss, real_scale);
        t.backward(scaled);
        accumulate(t, bound);
      }
    }
  }

  metrics.loss_total = metrics.loss_synth + metrics.loss_self;
  const Optimizer::StepInfo info =
      state.opt.step(state.params.store, grads, state.curriculum.j, state.curriculum.j_max);
  metrics.lr = info.lr;
  metrics.grad_norm = info.grad_norm;
  if (!state.params.all_finite())
    throw std::runtime_error("train_step: parameters diverged to non-finite values");
  state.curriculum.j += 1;
  return metrics;
}

std::vector<int> batch_indices(uint64_t seed, uint64_t stream, int dataset_size, int batch,
                               long step) {
  if (dataset_size < 1 || batch < 1)
    throw std::invalid_argument("batch_indices: need a non-empty dataset and batch");
  std::vector<int> out(static_cast<size_t>(batch));
  long epoch_cached = -1;
  std::vector<int> perm;
  for (int k = 0; k < batch; ++k) {
    const long g = step * batch + k;
    const long epoch = g / dataset_size;
    const long pos = g % dataset_size;
    if (epoch != epoch_cached) {
      perm = epoch_perm(seed, stream, dataset_size, epoch);
      epoch_cached = epoch;
    }
    out[static_cast<size_t>(k)] = perm[static_cast<size_t>(pos)];
  }
  return out;
}

void save_checkpoint(const std::string& path, const TrainConfig& cfg, const TrainState& state,
                     uint64_t config_hash) {
  const std::string tmp = path + ".tmp";
  {
    core::BinWriter w(tmp);
    w.u32(kCheckpointMagic);
    w.u32(kCheckpointVersion);
    w.str(cfg.to_json());
    w.u64(config_hash);
    w.i64(state.curriculum.j);
    w.i64(state.opt.updates());
    w.u32(static_cast<uint32_t>(state.params.store.size()));
    for (int i = 0; i < state.params.store.size(); ++i) {
      w.str(state.params.store.name(i));
      w.tensor(state.params.store.at(i));
    }
    for (const Tensor& t : state.opt.moment1()) w.tensor(t);
    for (const Tensor& t : state.opt.moment2()) w.tensor(t);
    for (uint64_t s : state.rng.state()) w.u64(s);
    if (!w.good()) throw std::runtime_error("checkpoint write failed: " + path);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  core::BinReader r(path);
  if (r.u32() != kCheckpointMagic) throw std::runtime_error("not a checkpoint file: " + path);
  if (r.u32() != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version: " + path);
  Checkpoint ck;
  ck.config = TrainConfig::from_json(r.str());
  ck.config_hash = r.u64();
  ck.j = r.i64();
  ck.opt_updates = r.i64();
  const uint32_t n = r.u32();
  ck.params.reserve(n);
  std::vector<std::string> names;
  for (uint32_t i = 0; i < n; ++i) {
    names.push_back(r.str());
    ck.params.push_back(r.tensor());
  }
  for (uint32_t i = 0; i < n; ++i) ck.m.push_back(r.tensor());
  for (uint32_t i = 0; i < n; ++i) ck.v.push_back(r.tensor());
  for (auto& s : ck.rng_state) s = r.u64();

  // structural sanity against a freshly initialized store
  const reconstructor::ReconstructorParams ref =
      reconstructor::init_params(ck.config.model, ck.config.seed);
  if (ref.store.size() != static_cast<int>(n))
    throw std::runtime_error("checkpoint parameter count mismatch");
  for (uint32_t i = 0; i < n; ++i) {
    if (names[i] != ref.store.name(static_cast<int>(i)) ||
        ck.params[i].shape() != ref.store.at(static_cast<int>(i)).shape())
      throw std::runtime_error("checkpoint parameter layout mismatch at " + names[i]);
  }
  return ck;
}

TrainState state_from_checkpoint(const Checkpoint& ck) {
  TrainState state(ck.config);
  for (size_t i = 0; i < ck.params.size(); ++i)
    state.params.store.at(static_cast<int>(i)) = ck.params[i];
  state.opt.restore(ck.opt_updates, ck.m, ck.v);
  state.curriculum.j = ck.j;
  state.rng.set_state(ck.rng_state);
  return state;
}

TrainState fit(const TrainConfig& cfg, const std::vector<SynthSample>& synth_set,
               const std::vector<RealSample>& real_set, const SemanticEmbedder& embedder,
               const PerceptualBackend* perceptual, const std::string& out_dir,
               uint64_t config_hash, const std::string& resume_from,
               const StepCallback& on_step) {
  cfg.validate();
  if (synth_set.empty()) throw std::invalid_argument("fit: empty synthetic dataset");
  const bool real_active = (cfg.weights.lambda_in > 0.0 || cfg.weights.lambda_pix > 0.0 ||
                            cfg.weights.lambda_sem > 0.0) &&
                           cfg.batch_real > 0;
  if (real_set.empty() && real_active)
    throw std::invalid_argument("fit: empty single-view dataset with active self-training losses");

  std::filesystem::create_directories(out_dir);
  const std::string ckpt_path = out_dir + "/checkpoint.bin";
  const std::string log_path = out_dir + "/train_log.jsonl";

  TrainState state = [&] {
    if (resume_from.empty()) return TrainState(cfg);
    Checkpoint ck = load_checkpoint(resume_from);
    if (ck.config.to_json() != cfg.to_json())
      throw std::runtime_error("fit: resume checkpoint was written with a different config");
    return state_from_checkpoint(ck);
  }();

  std::ofstream log(log_path, std::ios::app);
  if (!log) throw std::runtime_error("fit: cannot open training log " + log_path);

  while (state.curriculum.j < cfg.j_max) {
    const long j = state.curriculum.j;
    std::vector<SynthSample> synth_batch;
    for (int idx : batch_indices(cfg.seed, kSynthStream, static_cast<int>(synth_set.size()),
                                 cfg.batch_synth, j))
      synth_batch.push_back(synth_set[static_cast<size_t>(idx)]);
    std::vector<RealSample> real_batch;
    if (real_active)
      for (int idx : batch_indices(cfg.seed, kRealStream, static_cast<int>(real_set.size()),
                                   cfg.batch_real, j))
        real_batch.push_back(real_set[static_cast<size_t>(idx)]);

    const StepMetrics m = train_step(state, cfg, synth_batch, real_batch, embedder, perceptual);

    nlohmann::json row;
    row["j"] = m.j;
    row["lr"] = m.lr;
    row["grad_norm"] = m.grad_norm;
    row["loss"] = m.loss_total;
    row["synth"] = m.loss_synth;
    row["self"] = m.loss_self;
    row["in"] = m.loss_in;
    row["pix"] = m.loss_pix;
    row["sem"] = m.loss_sem;
    row["theta"] = m.theta_bound;
    row["phi"] = m.phi_bound;
    row["config_hash"] = config_hash;
    log << row.dump() << "\n";
    log.flush();

    if (on_step) on_step(m);
    if (cfg.checkpoint_every > 0 && state.curriculum.j % cfg.checkpoint_every == 0)
      save_checkpoint(ckpt_path, cfg, state, config_hash);
  }
  save_checkpoint(ckpt_path, cfg, state, config_hash);
  return state;
}

}  // namespace svr::selftrain
