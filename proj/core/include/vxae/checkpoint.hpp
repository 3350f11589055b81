#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vxae/adam.hpp"
#include "vxae/fs_util.hpp"
#include "vxae/model.hpp"
#include "vxae/tensor.hpp"

namespace vxae {

struct NamedTensor {
  std::string name;
  Shape shape;
  std::vector<float> values;
  bool operator==(const NamedTensor&) const = default;
};

struct AdamMeta {
  std::uint64_t t = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool operator==(const AdamMeta&) const = default;
};

// Layout (little-endian): "VXAE", u16 version, u32 spec length + spec text, u64 step,
// u64 seed, Adam metadata (u64 t, f64 lr, beta1, beta2, eps), u32 tensor count, then per
// tensor u32 name length + name, u32 rank, u32 extents, f32 payload. Adam moments are
// stored as tensors named "adam.m.<param>" and "adam.v.<param>".
struct Checkpoint {
  static constexpr std::uint16_t kVersion = 1;

  std::string spec_text;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  AdamMeta adam;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(std::string_view name) const;
  bool operator==(const Checkpoint&) const = default;
};

Bytes save_checkpoint(const Checkpoint& ckpt);
// Throws FormatError on a bad magic, unknown version, truncation, duplicate names or
// trailing bytes.
Checkpoint load_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint_file(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint_file(const std::filesystem::path& path);

// Snapshot of every model tensor plus optional optimizer state.
Checkpoint make_checkpoint(const Autoencoder<float>& model, const AdamState<float>* adam, std::uint64_t step);
// Rebuilds the model described by the checkpoint and loads its tensors.
Autoencoder<float> model_from_checkpoint(const Checkpoint& ckpt);
// Copies tensors named like the model's into it. Throws FormatError when a model
// tensor is missing or has a different shape.
void load_model_tensors(const Checkpoint& ckpt, ParamStore<float>& params, std::string_view prefix = "");
// Restores Adam moments for the model's trainable parameters.
AdamState<float> adam_from_checkpoint(const Checkpoint& ckpt, const ParamStore<float>& params);

}  // namespace vxae
