#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "vxae/block_spec.hpp"
#include "vxae/blocks.hpp"
#include "vxae/param_store.hpp"
#include "vxae/tensor.hpp"

namespace vxae {

struct ModelSpec {
  std::string name = "model";
  int input_dim = 64;
  int latent_dim = 256;
  std::vector<BlockSpec> encoder;
  std::vector<BlockSpec> decoder;
  Activation output_activation = Activation::Sigmoid;

  // Throws ShapeError unless the encoder maps (1, input_dim^3) to a flat latent_dim
  // vector and the decoder maps that back to (1, input_dim^3).
  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

struct ShapeTraceRow {
  std::string stage;  // "encoder" or "decoder"
  std::size_t index = 0;
  BlockSpec block;
  FeatureShape output;
};

// Output shape after every block, encoder first.
std::vector<ShapeTraceRow> shape_trace(const ModelSpec& spec);

std::int64_t count_encoder_params(const ModelSpec& spec);
std::int64_t count_decoder_params(const ModelSpec& spec);
std::int64_t count_params(const ModelSpec& spec);

// Text form:
//   model <name>
//   input_dim <n>
//   latent_dim <n>
//   output <activation>
//   encoder
//   <block line>...
//   decoder
//   <block line>...
//   end
std::string to_text(const ModelSpec& spec);
ModelSpec parse_model_spec(std::string_view text);

// Convolutional baseline: ReLU Conv3D stacks separated by 2x2x2 max pooling, a
// (4,4,4,4) bottleneck flattened to the latent, and a decoder in reverse order built
// from transposed convolutions with 2x2x2 stride-2 transposed convolutions in place of
// the pooling layers. `bottom_repeats` is the number of 32-channel convolutions at 4^3.
// For input_dim = 64 / 2^j the first j resolution levels are left out so the latent
// stays 4 * 4^3.
ModelSpec build_baseline(int input_dim = 64, int bottom_repeats = 1, double dropout_rate = 0.2);

struct ResidualPreset {
  std::string name = "default";
  int stem_channels = 8;
  std::vector<int> stage_channels = {16, 24, 32, 32};
  std::vector<int> stage_strides = {2, 2, 2, 1};
  int bottleneck_channels = 4;
  int expand_factor = 4;
  double se_ratio = 0.25;
  int kernel = 3;
  int latent_dim = 256;
};

// Named presets: "default" (about 196K parameters), "small" and "wide".
ResidualPreset residual_preset(std::string_view name);

// Stem Conv3D (s2, BN, SiLU), MBConv3D stages, pointwise projection to
// bottleneck_channels, flatten and a dense bottleneck to 256 values. The decoder is a
// dense layer, reshape, pointwise expansion, mirrored MBConvTranspose3D stages, a
// stride-2 transposed convolution replacing the stem and a pointwise projection to one
// channel. For input_dim = 64 / 2^j the outermost j stage strides become 1. Throws
// ShapeError when the preset cannot reach a 256-value latent.
ModelSpec build_residual(const ResidualPreset& preset = {}, int input_dim = 64);

// "baseline" or "residual[:preset]".
ModelSpec build_model(std::string_view name, int input_dim = 64);

template <typename T>
class Autoencoder {
 public:
  struct Output {
    Tensor<T> recon;
    Tensor<T> latent;
  };

  // Parameters are initialized from `seed`; the same seed also keys dropout masks.
  Autoencoder(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  ParamStore<T>& params() { return params_; }
  const ParamStore<T>& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  // `step` varies the dropout masks between training steps.
  Output forward(const Tensor<T>& x, Mode mode, std::uint64_t step = 0);
  Tensor<T> encode(const Tensor<T>& x, Mode mode, std::uint64_t step = 0);
  Tensor<T> decode(const Tensor<T>& latent, Mode mode, std::uint64_t step = 0);

 private:
  ModelSpec spec_;
  std::uint64_t seed_;
  ParamStore<T> params_;
};

extern template class Autoencoder<float>;
extern template class Autoencoder<double>;

}  // namespace vxae
