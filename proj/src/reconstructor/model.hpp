#pragma once

#include <string>
#include <vector>

#include "ad/ops.hpp"
#include "core/param_store.hpp"
#include "core/rng.hpp"
#include "renderfield/render.hpp"

namespace svr::reconstructor {

// Architecture of the image-to-triplane model. input_resolution must be a
// multiple of patch_size; triplane_size a power of two; token_width a multiple
// of n_heads.
struct ModelConfig {
  int input_resolution = 128;
  int patch_size = 8;
  int triplane_size = 32;
  int channels = 16;
  int token_width = 256;
  int n_blocks = 4;
  int n_heads = 4;
  int decoder_hidden = 64;
  int decoder_layers = 3;

  void validate() const;
  int n_image_tokens() const {
    const int side = input_resolution / patch_size;
    return side * side;
  }
  int n_query_tokens() const {
    const int q = triplane_size / 2;
    return 3 * q * q;
  }

  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
  bool operator==(const ModelConfig& o) const;
};

// All learnable tensors, in the fixed order the optimizer and checkpoints use.
struct ReconstructorParams {
  ModelConfig config;
  core::ParamStore store;

  bool all_finite() const {
    for (int i = 0; i < store.size(); ++i)
      if (!store.at(i).all_finite()) return false;
    return true;
  }
};

ReconstructorParams init_params(const ModelConfig& config, uint64_t seed);

// Parameters bound onto a tape, in store order. as_leaf=false binds constants
// (no gradients flow), as_leaf=true binds leaves for training.
struct BoundParams {
  const ReconstructorParams* params = nullptr;
  std::vector<ad::Var> vars;

  ad::Var var(const std::string& name) const {
    return vars[static_cast<size_t>(params->store.index(name))];
  }
  renderfield::DecoderVars decoder(ad::Tape& t) const;
};
BoundParams bind_params(ad::Tape& t, const ReconstructorParams& params, bool as_leaf);

// Image (R,R,3) var -> triplane (3,h,w,c) var, fully on the tape.
ad::Var reconstruct(ad::Tape& t, const BoundParams& bound, ad::Var image);

// Non-tape convenience: runs the same graph on constants and returns the
// values. Bitwise identical to the tape path.
renderfield::Triplane reconstruct_plain(const ReconstructorParams& params,
                                        const core::Tensor& image);
void decoder_from_params(const ReconstructorParams& params, renderfield::FieldDecoder& dec);

}  // namespace svr::reconstructor
