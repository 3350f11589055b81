#include <Eigen/Core>

#include "conv_kernels.hpp"
#include "vxae/autograd.hpp"
#include "vxae/errors.hpp"
#include "vxae/ops.hpp"

namespace vxae {

std::int64_t conv_output_extent(std::int64_t in, std::int64_t kernel, std::int64_t stride, std::int64_t padding) {
  if (stride < 1) throw ShapeError("stride must be >= 1, got " + std::to_string(stride));
  if (padding < 0) throw ShapeError("padding must be >= 0");
  if (kernel > in + 2 * padding)
    throw ShapeError("kernel " + std::to_string(kernel) + " larger than padded extent " +
                     std::to_string(in + 2 * padding));
  return (in + 2 * padding - kernel) / stride + 1;
}

std::int64_t conv_transpose_output_extent(std::int64_t in, std::int64_t kernel, std::int64_t stride,
                                          std::int64_t padding, std::int64_t output_padding) {
  if (stride < 1) throw ShapeError("stride must be >= 1, got " + std::to_string(stride));
  if (padding < 0 || output_padding < 0) throw ShapeError("padding must be >= 0");
  const std::int64_t out = (in - 1) * stride - 2 * padding + kernel + output_padding;
  if (out < 1) throw ShapeError("transposed convolution output extent " + std::to_string(out) + " is not positive");
  return out;
}

namespace {

using detail::TapGeometry;

// Dense channel mixing goes through im2col + GEMM; thin or grouped convolutions
// use the direct row kernels, which win when the GEMM would be a few rows tall.
bool use_gemm(const TapGeometry& g) { return g.groups == 1 && g.small_channels * g.big_channels >= 64; }

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
void run_gather(const TapGeometry& g, const T* big, const T* weight, T* small_out) {
  if (!use_gemm(g)) return detail::tap_gather(g, big, weight, small_out);
  const std::int64_t rows = g.big_channels * g.taps(), vol = g.small_volume();
  std::vector<T> col(static_cast<std::size_t>(rows * vol));
  Eigen::Map<const RowMat<T>> w(weight, g.small_channels, rows);
  Eigen::Map<const RowMat<T>> c(col.data(), rows, vol);
  for (std::int64_t n = 0; n < g.batch; ++n) {
    detail::tap_im2col(g, big + n * g.big_channels * g.big_volume(), col.data());
    Eigen::Map<RowMat<T>> y(small_out + n * g.small_channels * vol, g.small_channels, vol);
    y.noalias() += w * c;
  }
}

template <typename T>
void run_scatter(const TapGeometry& g, const T* small, const T* weight, T* big_out) {
  if (!use_gemm(g)) return detail::tap_scatter(g, small, weight, big_out);
  const std::int64_t rows = g.big_channels * g.taps(), vol = g.small_volume();
  std::vector<T> col(static_cast<std::size_t>(rows * vol));
  Eigen::Map<const RowMat<T>> w(weight, g.small_channels, rows);
  Eigen::Map<RowMat<T>> c(col.data(), rows, vol);
  for (std::int64_t n = 0; n < g.batch; ++n) {
    Eigen::Map<const RowMat<T>> x(small + n * g.small_channels * vol, g.small_channels, vol);
    c.noalias() = w.transpose() * x;
    detail::tap_col2im(g, col.data(), big_out + n * g.big_channels * g.big_volume());
  }
}

template <typename T>
void run_correlate(const TapGeometry& g, const T* small, const T* big, T* weight_grad) {
  if (!use_gemm(g)) return detail::tap_correlate(g, small, big, weight_grad);
  const std::int64_t rows = g.big_channels * g.taps(), vol = g.small_volume();
  std::vector<T> col(static_cast<std::size_t>(rows * vol));
  Eigen::Map<RowMat<T>> dw(weight_grad, g.small_channels, rows);
  Eigen::Map<const RowMat<T>> c(col.data(), rows, vol);
  for (std::int64_t n = 0; n < g.batch; ++n) {
    detail::tap_im2col(g, big + n * g.big_channels * g.big_volume(), col.data());
    Eigen::Map<const RowMat<T>> x(small + n * g.small_channels * vol, g.small_channels, vol);
    dw.noalias() += x * c.transpose();
  }
}

template <typename T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* op, const char* what) {
  if (!t.defined()) throw ShapeError(std::string(op) + ": " + what + " is undefined");
  if (t.rank() != rank)
    throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) + ", got " +
                     shape_to_string(t.shape()));
}

template <typename T>
void require_cubic_kernel(const Tensor<T>& w, const char* op) {
  if (w.dim(2) != w.dim(3) || w.dim(2) != w.dim(4))
    throw ShapeError(std::string(op) + ": kernel must be cubic, got weight " + shape_to_string(w.shape()));
}

template <typename T>
void check_bias(const Tensor<T>& bias, std::int64_t channels, const char* op) {
  if (!bias.defined()) return;
  if (bias.rank() != 1 || bias.dim(0) != channels)
    throw ShapeError(std::string(op) + ": bias must be [" + std::to_string(channels) + "], got " +
                     shape_to_string(bias.shape()));
}

template <typename T>
void add_bias(std::vector<T>& out, const Tensor<T>& bias, std::int64_t batch, std::int64_t channels,
              std::int64_t volume) {
  if (!bias.defined()) return;
  const auto b = bias.values();
  for (std::int64_t n = 0; n < batch; ++n)
    for (std::int64_t c = 0; c < channels; ++c) {
      T* dst = out.data() + (n * channels + c) * volume;
      for (std::int64_t i = 0; i < volume; ++i) dst[i] += b[static_cast<std::size_t>(c)];
    }
}

template <typename T>
void accumulate_bias_grad(detail::TensorImpl<T>& bias, const std::vector<T>& grad_out, std::int64_t batch,
                          std::int64_t channels, std::int64_t volume) {
  auto db = bias.grad_buffer();
  for (std::int64_t c = 0; c < channels; ++c) {
    double acc = 0.0;
    for (std::int64_t n = 0; n < batch; ++n) {
      const T* src = grad_out.data() + (n * channels + c) * volume;
      for (std::int64_t i = 0; i < volume; ++i) acc += src[i];
    }
    db[static_cast<std::size_t>(c)] += static_cast<T>(acc);
  }
}

// Shared implementation of the regular and depthwise forward convolution.
template <typename T>
Tensor<T> conv_forward_impl(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int stride,
                            int padding, std::int64_t groups, const char* op) {
  detail::TapGeometry g;
  g.batch = input.dim(0);
  g.big_channels = input.dim(1);
  g.small_channels = weight.dim(0);
  g.groups = groups;
  g.kernel = weight.dim(2);
  g.stride = stride;
  g.pad = padding;
  for (int a = 0; a < 3; ++a) {
    g.big[a] = input.dim(2 + a);
    g.small[a] = conv_output_extent(g.big[a], g.kernel, stride, padding);
  }
  check_bias(bias, g.small_channels, op);

  std::vector<T> out(static_cast<std::size_t>(g.batch * g.small_channels * g.small_volume()), T(0));
  run_gather(g, input.values().data(), weight.values().data(), out.data());
  add_bias(out, bias, g.batch, g.small_channels, g.small_volume());

  Shape shape{g.batch, g.small_channels, g.small[0], g.small[1], g.small[2]};
  auto x = input.impl();
  auto w = weight.impl();
  auto b = bias.impl();
  return detail::make_result<T>(std::move(shape), std::move(out), {&input, &weight, &bias},
                                [g, x, w, b](const detail::TensorImpl<T>& y) {
                                  if (x->requires_grad)
                                    run_scatter(g, y.grad.data(), w->values.data(), x->grad_buffer().data());
                                  if (w->requires_grad)
                                    run_correlate(g, y.grad.data(), x->values.data(), w->grad_buffer().data());
                                  if (b && b->requires_grad)
                                    accumulate_bias_grad(*b, y.grad, g.batch, g.small_channels, g.small_volume());
                                });
}

template <typename T>
Tensor<T> conv_transpose_impl(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int stride,
                              int padding, int output_padding, std::int64_t groups, std::int64_t out_channels,
                              const char* op) {
  if (output_padding >= stride && output_padding > 0)
    throw ShapeError(std::string(op) + ": output_padding must be smaller than stride");
  detail::TapGeometry g;
  g.batch = input.dim(0);
  g.small_channels = input.dim(1);
  g.big_channels = out_channels;
  g.groups = groups;
  g.kernel = weight.dim(2);
  g.stride = stride;
  g.pad = padding;
  for (int a = 0; a < 3; ++a) {
    g.small[a] = input.dim(2 + a);
    g.big[a] = conv_transpose_output_extent(g.small[a], g.kernel, stride, padding, output_padding);
  }
  check_bias(bias, g.big_channels, op);

  std::vector<T> out(static_cast<std::size_t>(g.batch * g.big_channels * g.big_volume()), T(0));
  run_scatter(g, input.values().data(), weight.values().data(), out.data());
  add_bias(out, bias, g.batch, g.big_channels, g.big_volume());

  Shape shape{g.batch, g.big_channels, g.big[0], g.big[1], g.big[2]};
  auto x = input.impl();
  auto w = weight.impl();
  auto b = bias.impl();
  return detail::make_result<T>(std::move(shape), std::move(out), {&input, &weight, &bias},
                                [g, x, w, b](const detail::TensorImpl<T>& y) {
                                  if (x->requires_grad)
                                    run_gather(g, y.grad.data(), w->values.data(), x->grad_buffer().data());
                                  if (w->requires_grad)
                                    run_correlate(g, x->values.data(), y.grad.data(), w->grad_buffer().data());
                                  if (b && b->requires_grad)
                                    accumulate_bias_grad(*b, y.grad, g.batch, g.big_channels, g.big_volume());
                                });
}

}  // namespace

template <typename T>
Tensor<T> conv3d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int stride, int padding) {
  require_rank(input, 5, "conv3d", "input");
  require_rank(weight, 5, "conv3d", "weight");
  require_cubic_kernel(weight, "conv3d");
  if (weight.dim(1) != input.dim(1))
    throw ShapeError("conv3d: input has " + std::to_string(input.dim(1)) + " channels but weight " +
                     shape_to_string(weight.shape()) + " expects " + std::to_string(weight.dim(1)));
  return conv_forward_impl(input, weight, bias, stride, padding, 1, "conv3d");
}

template <typename T>
Tensor<T> conv3d_transpose(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, int stride,
                           int padding, int output_padding) {
  require_rank(input, 5, "conv3d_transpose", "input");
  require_rank(weight, 5, "conv3d_transpose", "weight");
  require_cubic_kernel(weight, "conv3d_transpose");
  if (weight.dim(0) != input.dim(1))
    throw ShapeError("conv3d_transpose: input has " + std::to_string(input.dim(1)) + " channels but weight " +
                     shape_to_string(weight.shape()) + " expects " + std::to_string(weight.dim(0)));
  return conv_transpose_impl(input, weight, bias, stride, padding, output_padding, 1, weight.dim(1),
                             "conv3d_transpose");
}

template <typename T>
Tensor<T> depthwise_conv3d(const Tensor<T>& input, const Tensor<T>& weight, int stride, int padding) {
  require_rank(input, 5, "depthwise_conv3d", "input");
  require_rank(weight, 5, "depthwise_conv3d", "weight");
  require_cubic_kernel(weight, "depthwise_conv3d");
  if (weight.dim(0) != input.dim(1) || weight.dim(1) != 1)
    throw ShapeError("depthwise_conv3d: weight " + shape_to_string(weight.shape()) + " does not match " +
                     std::to_string(input.dim(1)) + " input channels (expected [C,1,k,k,k])");
  return conv_forward_impl(input, weight, Tensor<T>{}, stride, padding, input.dim(1), "depthwise_conv3d");
}

template <typename T>
Tensor<T> depthwise_conv3d_transpose(const Tensor<T>& input, const Tensor<T>& weight, int stride, int padding,
                                     int output_padding) {
  require_rank(input, 5, "depthwise_conv3d_transpose", "input");
  require_rank(weight, 5, "depthwise_conv3d_transpose", "weight");
  require_cubic_kernel(weight, "depthwise_conv3d_transpose");
  if (weight.dim(0) != input.dim(1) || weight.dim(1) != 1)
    throw ShapeError("depthwise_conv3d_transpose: weight " + shape_to_string(weight.shape()) + " does not match " +
                     std::to_string(input.dim(1)) + " input channels (expected [C,1,k,k,k])");
  return conv_transpose_impl(input, weight, Tensor<T>{}, stride, padding, output_padding, input.dim(1),
                             input.dim(1), "depthwise_conv3d_transpose");
}

template <typename T>
Tensor<T> pointwise_conv3d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_rank(input, 5, "pointwise_conv3d", "input");
  require_rank(weight, 5, "pointwise_conv3d", "weight");
  if (weight.dim(2) != 1 || weight.dim(3) != 1 || weight.dim(4) != 1 || weight.dim(1) != input.dim(1))
    throw ShapeError("pointwise_conv3d: weight " + shape_to_string(weight.shape()) + " incompatible with input " +
                     shape_to_string(input.shape()));
  const std::int64_t batch = input.dim(0), cin = input.dim(1), cout = weight.dim(0);
  const std::int64_t volume = input.dim(2) * input.dim(3) * input.dim(4);
  check_bias(bias, cout, "pointwise_conv3d");

  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ConstMap = Eigen::Map<const Mat>;
  using MutMap = Eigen::Map<Mat>;

  std::vector<T> out(static_cast<std::size_t>(batch * cout * volume));
  ConstMap w(weight.values().data(), cout, cin);
  for (std::int64_t n = 0; n < batch; ++n) {
    ConstMap x(input.values().data() + n * cin * volume, cin, volume);
    MutMap y(out.data() + n * cout * volume, cout, volume);
    y.noalias() = w * x;
  }
  add_bias(out, bias, batch, cout, volume);

  Shape shape{batch, cout, input.dim(2), input.dim(3), input.dim(4)};
  auto xi = input.impl();
  auto wi = weight.impl();
  auto bi = bias.impl();
  return detail::make_result<T>(
      std::move(shape), std::move(out), {&input, &weight, &bias},
      [xi, wi, bi, batch, cin, cout, volume](const detail::TensorImpl<T>& y) {
        ConstMap w(wi->values.data(), cout, cin);
        if (xi->requires_grad) {
          auto dx = xi->grad_buffer();
          for (std::int64_t n = 0; n < batch; ++n) {
            ConstMap dy(y.grad.data() + n * cout * volume, cout, volume);
            MutMap dxn(dx.data() + n * cin * volume, cin, volume);
            dxn.noalias() += w.transpose() * dy;
          }
        }
        if (wi->requires_grad) {
          MutMap dw(wi->grad_buffer().data(), cout, cin);
          for (std::int64_t n = 0; n < batch; ++n) {
            ConstMap dy(y.grad.data() + n * cout * volume, cout, volume);
            ConstMap x(xi->values.data() + n * cin * volume, cin, volume);
            dw.noalias() += dy * x.transpose();
          }
        }
        if (bi && bi->requires_grad) accumulate_bias_grad(*bi, y.grad, batch, cout, volume);
      });
}

#define VXAE_INSTANTIATE_CONV(T)                                                                              \
  template Tensor<T> conv3d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);               \
  template Tensor<T> conv3d_transpose<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int, int); \
  template Tensor<T> depthwise_conv3d<T>(const Tensor<T>&, const Tensor<T>&, int, int);                       \
  template Tensor<T> depthwise_conv3d_transpose<T>(const Tensor<T>&, const Tensor<T>&, int, int, int);        \
  template Tensor<T> pointwise_conv3d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);

VXAE_INSTANTIATE_CONV(float)
VXAE_INSTANTIATE_CONV(double)

}  // namespace vxae
