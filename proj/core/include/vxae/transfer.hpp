#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vxae/adam.hpp"
#include "vxae/checkpoint.hpp"
#include "vxae/model.hpp"

namespace vxae {

// Checkpoint holding the model spec and only the encoder tensors.
Checkpoint export_encoder(const Autoencoder<float>& model);

// Encoder restored from an exported (or full) checkpoint with all parameters frozen.
// It always runs in eval mode.
class FrozenEncoder {
 public:
  explicit FrozenEncoder(const Checkpoint& ckpt);

  const ModelSpec& spec() const { return spec_; }
  const ParamStore<float>& params() const { return params_; }
  Tensor<float> encode(const Tensor<float>& x);

 private:
  ModelSpec spec_;
  ParamStore<float> params_;
};

// Dense classification head on top of a latent vector, trained with MSE against
// one-hot targets.
class ClassifierHead {
 public:
  ClassifierHead(int latent_dim, int classes, std::uint64_t seed);

  ParamStore<float>& params() { return params_; }
  int classes() const { return classes_; }
  Tensor<float> forward(const Tensor<float>& latent);
  // One Adam step on the head parameters only; returns the loss before the update.
  double train_step(const Tensor<float>& latent, std::span<const int> labels, AdamState<float>& adam);

 private:
  int classes_;
  ParamStore<float> params_;
};

}  // namespace vxae
