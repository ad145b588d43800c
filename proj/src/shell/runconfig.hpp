#pragma once

#include <cstdint>
#include <string>

#include "selftrain/trainer.hpp"

namespace svr::shell {

// Everything a run needs in one validated file: the full training
// configuration plus the dataset roots it reads. The serialized form is
// hashed and the hash is embedded in every checkpoint and report.
struct RunConfig {
  selftrain::TrainConfig train;
  std::string synth_root;
  std::string real_root;  // empty: supervised-only run, no single-view set

  void validate() const;
  std::string to_json() const;
  static RunConfig from_json(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;
  std::uint64_t hash() const;
};

// Output-root override: when SVR_OUT_ROOT is set, relative output paths are
// re-rooted under it; absolute paths are left alone.
std::string resolve_out_dir(const std::string& out);

}  // namespace svr::shell
