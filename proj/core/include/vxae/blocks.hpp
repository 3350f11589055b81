#pragma once

#include <string>

#include "vxae/block_spec.hpp"
#include "vxae/ops.hpp"
#include "vxae/param_store.hpp"
#include "vxae/rng.hpp"

namespace vxae {

struct BlockContext {
  Mode mode = Mode::Train;
  DropoutKey dropout{};  // the caller sets salt per block so masks differ between layers
};

// Adds the block's tensors to `store` under `prefix` (e.g. "encoder.3."). Weights get a
// fan-in scaled normal (std sqrt(2 / fan_in)); biases and beta 0, gamma 1, running
// mean 0 and running variance 1.
template <typename T>
void init_block_params(const BlockSpec& spec, const std::string& prefix, ParamStore<T>& store, Rng& rng);

// Runs one block of any kind. Throws ShapeError when a stored tensor does not have the
// shape the spec implies.
template <typename T>
Tensor<T> block_forward(const Tensor<T>& x, const BlockSpec& spec, ParamStore<T>& store, const std::string& prefix,
                        const BlockContext& ctx);

// expand (pointwise, BN, SiLU) -> depthwise k^3 stride s (BN, SiLU) -> squeeze-excite ->
// project (pointwise, BN), plus identity skip when stride == 1 and c_in == c_out.
template <typename T>
Tensor<T> mbconv3d_forward(const Tensor<T>& x, const BlockSpec& spec, ParamStore<T>& store, const std::string& prefix,
                           Mode mode);

// As mbconv3d_forward but the expansion width is expand_factor * c_out and the
// depthwise stage is a transposed convolution that upsamples by the stride.
template <typename T>
Tensor<T> mbconvtranspose3d_forward(const Tensor<T>& x, const BlockSpec& spec, ParamStore<T>& store,
                                    const std::string& prefix, Mode mode);

// w1 [C,S], b1 [S], w2 [S,C], b2 [C].
template <typename T>
struct SqueezeExciteParams {
  Tensor<T> w1, b1, w2, b2;
};

// x scaled per channel by sigmoid(dense(silu(dense(global_avg_pool(x))))).
template <typename T>
Tensor<T> squeeze_excite(const Tensor<T>& x, const SqueezeExciteParams<T>& params);

template <typename T>
Tensor<T> apply_activation(const Tensor<T>& x, Activation act);

}  // namespace vxae
