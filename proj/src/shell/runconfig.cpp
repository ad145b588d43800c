#include "shell/runconfig.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "core/serialize.hpp"

namespace svr::shell {

void RunConfig::validate() const {
  train.validate();
  if (synth_root.empty()) throw std::invalid_argument("RunConfig: synth_root is required");
  const bool real_active = (train.weights.lambda_in > 0.0 || train.weights.lambda_pix > 0.0 ||
                            train.weights.lambda_sem > 0.0) &&
                           train.batch_real > 0;
  if (real_active && real_root.empty())
    throw std::invalid_argument("RunConfig: real_root is required when self-training is active");
}

std::string RunConfig::to_json() const {
  nlohmann::json j;
  j["train"] = nlohmann::json::parse(train.to_json());
  j["synth_root"] = synth_root;
  j["real_root"] = real_root;
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  RunConfig c;
  c.train = selftrain::TrainConfig::from_json(j.at("train").dump());
  c.synth_root = j.at("synth_root").get<std::string>();
  c.real_root = j.value("real_root", std::string());
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << to_json() << "\n";
}

std::uint64_t RunConfig::hash() const { return core::fnv1a(to_json()); }

std::string resolve_out_dir(const std::string& out) {
  const char* root = std::getenv("SVR_OUT_ROOT");
  if (root == nullptr || *root == '\0') return out;
  const std::filesystem::path p(out);
  if (p.is_absolute()) return out;
  return (std::filesystem::path(root) / p).string();
}

}  // namespace svr::shell
