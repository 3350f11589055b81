#pragma once

#include <cstdint>

#include "vxae/tensor.hpp"

// Differentiable tensor operations. Activations use the (batch, channel, depth,
// height, width) layout. Optional operands (biases) are passed as undefined tensors.
namespace vxae {

// Output extent of a strided, symmetrically padded convolution along one axis.
std::int64_t conv_output_extent(std::int64_t in, std::int64_t kernel, std::int64_t stride, std::int64_t padding);
// Output extent of the matching transposed convolution.
std::int64_t conv_transpose_output_extent(std::int64_t in, std::int64_t kernel, std::int64_t stride,
                                          std::int64_t padding, std::int64_t output_padding = 0);

// input [N,Cin,D,H,W], weight [Cout,Cin,k,k,k], bias [Cout] -> [N,Cout,D',H',W'].
template <typename T>
Tensor<T> conv3d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias = {}, int stride = 1,
                 int padding = 0);

// Adjoint of conv3d. input [N,Cin,D,H,W], weight [Cin,Cout,k,k,k] -> [N,Cout,D',H',W'] with
// D' = (D-1)*stride - 2*padding + k + output_padding.
template <typename T>
Tensor<T> conv3d_transpose(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias = {},
                           int stride = 1, int padding = 0, int output_padding = 0);

// One k^3 kernel per channel, weight [C,1,k,k,k].
template <typename T>
Tensor<T> depthwise_conv3d(const Tensor<T>& input, const Tensor<T>& weight, int stride = 1, int padding = 0);

template <typename T>
Tensor<T> depthwise_conv3d_transpose(const Tensor<T>& input, const Tensor<T>& weight, int stride = 1,
                                     int padding = 0, int output_padding = 0);

// Per-voxel channel mixing, weight [Cout,Cin,1,1,1].
template <typename T>
Tensor<T> pointwise_conv3d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias = {});

template <typename T>
Tensor<T> silu(const Tensor<T>& input);
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input);
template <typename T>
Tensor<T> relu(const Tensor<T>& input);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul_scalar(const Tensor<T>& a, T factor);
// Sum of all elements, rank-0 result.
template <typename T>
Tensor<T> sum(const Tensor<T>& input);
// x [N,C,...] scaled by gate [N,C] broadcast over the trailing axes.
template <typename T>
Tensor<T> scale_channels(const Tensor<T>& input, const Tensor<T>& gate);

// Per-channel normalization over (N, spatial). In Train mode uses batch statistics and
// updates running_mean/running_var in place (running = (1-momentum)*running + momentum*batch,
// unbiased batch variance). Eval mode uses the running statistics.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta,
                     Tensor<T>& running_mean, Tensor<T>& running_var, Mode mode, T momentum = T(0.1),
                     T eps = T(1e-5));

// No padding. Backward routes each gradient to the first maximum in scan order.
template <typename T>
Tensor<T> max_pool3d(const Tensor<T>& input, int kernel, int stride);

// [N,C,D,H,W] -> [N,C]
template <typename T>
Tensor<T> global_avg_pool3d(const Tensor<T>& input);

// [N,F] x [F,G] + [G] -> [N,G]
template <typename T>
Tensor<T> dense(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias = {});

// Identifies one dropout application. The keep mask is a pure function of
// (seed, step, salt, element index).
struct DropoutKey {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::uint64_t salt = 0;
};

template <typename T>
Tensor<T> dropout(const Tensor<T>& input, double rate, Mode mode, DropoutKey key);

template <typename T>
Tensor<T> reshape(const Tensor<T>& input, Shape shape);
// [N, ...] -> [N, prod(...)]
template <typename T>
Tensor<T> flatten(const Tensor<T>& input);

// Mean over all elements of (pred - target)^2, rank-0 result. Target receives no gradient.
template <typename T>
Tensor<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target);

}  // namespace vxae
