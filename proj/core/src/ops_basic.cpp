#include <Eigen/Core>
#include <cmath>

#include "vxae/autograd.hpp"
#include "vxae/errors.hpp"
#include "vxae/ops.hpp"
#include "vxae/rng.hpp"

namespace vxae {

namespace {

template <typename T>
T sigmoid_value(T x) {
  // Split on sign so exp never overflows.
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
void require_defined(const Tensor<T>& t, const char* op) {
  if (!t.defined()) throw ShapeError(std::string(op) + ": operand is undefined");
}

}  // namespace

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input) {
  require_defined(input, "sigmoid");
  const auto x = input.values();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid_value(x[i]);
  auto xi = input.impl();
  return detail::make_result<T>(input.shape(), std::move(out), {&input}, [xi](const detail::TensorImpl<T>& y) {
    auto dx = xi->grad_buffer();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += y.grad[i] * y.values[i] * (T(1) - y.values[i]);
  });
}

template <typename T>
Tensor<T> silu(const Tensor<T>& input) {
  require_defined(input, "silu");
  const auto x = input.values();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * sigmoid_value(x[i]);
  auto xi = input.impl();
  return detail::make_result<T>(input.shape(), std::move(out), {&input}, [xi](const detail::TensorImpl<T>& y) {
    auto dx = xi->grad_buffer();
    const auto& xv = xi->values;
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const T s = sigmoid_value(xv[i]);
      dx[i] += y.grad[i] * (s * (T(1) + xv[i] * (T(1) - s)));
    }
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  require_defined(input, "relu");
  const auto x = input.values();
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
  auto xi = input.impl();
  return detail::make_result<T>(input.shape(), std::move(out), {&input}, [xi](const detail::TensorImpl<T>& y) {
    auto dx = xi->grad_buffer();
    for (std::size_t i = 0; i < dx.size(); ++i)
      if (xi->values[i] > T(0)) dx[i] += y.grad[i];
  });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  if (a.shape() != b.shape())
    throw ShapeError("add: shapes differ, " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  const auto av = a.values(), bv = b.values();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] + bv[i];
  auto ai = a.impl(), bi = b.impl();
  return detail::make_result<T>(a.shape(), std::move(out), {&a, &b}, [ai, bi](const detail::TensorImpl<T>& y) {
    if (ai->requires_grad) ai->accumulate_grad(y.grad);
    if (bi->requires_grad) bi->accumulate_grad(y.grad);
  });
}

template <typename T>
Tensor<T> mul_scalar(const Tensor<T>& a, T factor) {
  require_defined(a, "mul_scalar");
  const auto av = a.values();
  std::vector<T> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] * factor;
  auto ai = a.impl();
  return detail::make_result<T>(a.shape(), std::move(out), {&a}, [ai, factor](const detail::TensorImpl<T>& y) {
    auto dx = ai->grad_buffer();
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += y.grad[i] * factor;
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& input) {
  require_defined(input, "sum");
  double acc = 0.0;
  for (T v : input.values()) acc += v;
  auto xi = input.impl();
  return detail::make_result<T>({}, {static_cast<T>(acc)}, {&input}, [xi](const detail::TensorImpl<T>& y) {
    auto dx = xi->grad_buffer();
    for (auto& d : dx) d += y.grad[0];
  });
}

template <typename T>
Tensor<T> scale_channels(const Tensor<T>& input, const Tensor<T>& gate) {
  require_defined(input, "scale_channels");
  require_defined(gate, "scale_channels");
  if (input.rank() < 2 || gate.rank() != 2 || gate.dim(0) != input.dim(0) || gate.dim(1) != input.dim(1))
    throw ShapeError("scale_channels: gate " + shape_to_string(gate.shape()) + " does not match input " +
                     shape_to_string(input.shape()));
  const std::int64_t planes = input.dim(0) * input.dim(1);
  const std::int64_t volume = input.numel() / planes;
  const auto x = input.values();
  const auto g = gate.values();
  std::vector<T> out(x.size());
  for (std::int64_t p = 0; p < planes; ++p)
    for (std::int64_t i = 0; i < volume; ++i) out[p * volume + i] = x[p * volume + i] * g[p];
  auto xi = input.impl(), gi = gate.impl();
  return detail::make_result<T>(input.shape(), std::move(out), {&input, &gate},
                                [xi, gi, planes, volume](const detail::TensorImpl<T>& y) {
                                  if (xi->requires_grad) {
                                    auto dx = xi->grad_buffer();
                                    for (std::int64_t p = 0; p < planes; ++p)
                                      for (std::int64_t i = 0; i < volume; ++i)
                                        dx[p * volume + i] += y.grad[p * volume + i] * gi->values[p];
                                  }
                                  if (gi->requires_grad) {
                                    auto dg = gi->grad_buffer();
                                    for (std::int64_t p = 0; p < planes; ++p) {
                                      double acc = 0.0;
                                      for (std::int64_t i = 0; i < volume; ++i)
                                        acc += y.grad[p * volume + i] * xi->values[p * volume + i];
                                      dg[p] += static_cast<T>(acc);
                                    }
                                  }
                                });
}

template <typename T>
Tensor<T> dense(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_defined(input, "dense");
  require_defined(weight, "dense");
  if (input.rank() != 2 || weight.rank() != 2 || weight.dim(0) != input.dim(1))
    throw ShapeError("dense: input " + shape_to_string(input.shape()) + " incompatible with weight " +
                     shape_to_string(weight.shape()));
  const std::int64_t n = input.dim(0), f = input.dim(1), g = weight.dim(1);
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != g))
    throw ShapeError("dense: bias must be [" + std::to_string(g) + "], got " + shape_to_string(bias.shape()));

  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ConstMap = Eigen::Map<const Mat>;
  using MutMap = Eigen::Map<Mat>;
  std::vector<T> out(static_cast<std::size_t>(n * g));
  MutMap y(out.data(), n, g);
  y.noalias() = ConstMap(input.values().data(), n, f) * ConstMap(weight.values().data(), f, g);
  if (bias.defined())
    for (std::int64_t r = 0; r < n; ++r)
      for (std::int64_t c = 0; c < g; ++c) y(r, c) += bias.values()[static_cast<std::size_t>(c)];

  auto xi = input.impl(), wi = weight.impl(), bi = bias.impl();
  return detail::make_result<T>({n, g}, std::move(out), {&input, &weight, &bias},
                                [xi, wi, bi, n, f, g](const detail::TensorImpl<T>& yimpl) {
                                  ConstMap dy(yimpl.grad.data(), n, g);
                                  if (xi->requires_grad) {
                                    MutMap dx(xi->grad_buffer().data(), n, f);
                                    dx.noalias() += dy * ConstMap(wi->values.data(), f, g).transpose();
                                  }
                                  if (wi->requires_grad) {
                                    MutMap dw(wi->grad_buffer().data(), f, g);
                                    dw.noalias() += ConstMap(xi->values.data(), n, f).transpose() * dy;
                                  }
                                  if (bi && bi->requires_grad) {
                                    auto db = bi->grad_buffer();
                                    for (std::int64_t c = 0; c < g; ++c) {
                                      double acc = 0.0;
                                      for (std::int64_t r = 0; r < n; ++r) acc += dy(r, c);
                                      db[static_cast<std::size_t>(c)] += static_cast<T>(acc);
                                    }
                                  }
                                });
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& input, double rate, Mode mode, DropoutKey key) {
  require_defined(input, "dropout");
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("dropout: rate must be in [0, 1]");
  if (mode == Mode::Eval || rate == 0.0) {
    std::vector<T> out(input.values().begin(), input.values().end());
    auto xi = input.impl();
    return detail::make_result<T>(input.shape(), std::move(out), {&input},
                                  [xi](const detail::TensorImpl<T>& y) { xi->accumulate_grad(y.grad); });
  }
  const T scale = rate < 1.0 ? static_cast<T>(1.0 / (1.0 - rate)) : T(0);
  const auto x = input.values();
  std::vector<T> mask(x.size());
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = to_unit_double(counter_hash(key.seed, key.step, key.salt, i));
    mask[i] = u >= rate ? scale : T(0);
    out[i] = x[i] * mask[i];
  }
  auto xi = input.impl();
  return detail::make_result<T>(input.shape(), std::move(out), {&input},
                                [xi, mask = std::move(mask)](const detail::TensorImpl<T>& y) {
                                  auto dx = xi->grad_buffer();
                                  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += y.grad[i] * mask[i];
                                });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& input, Shape shape) {
  require_defined(input, "reshape");
  if (shape_numel(shape) != input.numel())
    throw ShapeError("reshape: cannot view " + shape_to_string(input.shape()) + " as " + shape_to_string(shape));
  std::vector<T> out(input.values().begin(), input.values().end());
  auto xi = input.impl();
  return detail::make_result<T>(std::move(shape), std::move(out), {&input},
                                [xi](const detail::TensorImpl<T>& y) { xi->accumulate_grad(y.grad); });
}

template <typename T>
Tensor<T> flatten(const Tensor<T>& input) {
  require_defined(input, "flatten");
  if (input.rank() < 1) throw ShapeError("flatten: needs a batch axis");
  const std::int64_t n = input.dim(0);
  return reshape(input, Shape{n, input.numel() / n});
}

template <typename T>
Tensor<T> mse_loss(const Tensor<T>& pred, const Tensor<T>& target) {
  require_defined(pred, "mse_loss");
  require_defined(target, "mse_loss");
  if (pred.shape() != target.shape())
    throw ShapeError("mse_loss: prediction " + shape_to_string(pred.shape()) + " vs target " +
                     shape_to_string(target.shape()));
  const auto p = pred.values(), t = target.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
    acc += d * d;
  }
  const double count = static_cast<double>(p.size());
  auto pi = pred.impl(), ti = target.impl();
  return detail::make_result<T>({}, {static_cast<T>(acc / count)}, {&pred},
                                [pi, ti, count](const detail::TensorImpl<T>& y) {
                                  auto dp = pi->grad_buffer();
                                  const T scale = static_cast<T>(2.0 / count) * y.grad[0];
                                  for (std::size_t i = 0; i < dp.size(); ++i)
                                    dp[i] += scale * (pi->values[i] - ti->values[i]);
                                });
}

#define VXAE_INSTANTIATE_BASIC(T)                                                                \
  template Tensor<T> sigmoid<T>(const Tensor<T>&);                                               \
  template Tensor<T> silu<T>(const Tensor<T>&);                                                  \
  template Tensor<T> relu<T>(const Tensor<T>&);                                                  \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> mul_scalar<T>(const Tensor<T>&, T);                                         \
  template Tensor<T> sum<T>(const Tensor<T>&);                                                   \
  template Tensor<T> scale_channels<T>(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> dense<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);             \
  template Tensor<T> dropout<T>(const Tensor<T>&, double, Mode, DropoutKey);                     \
  template Tensor<T> reshape<T>(const Tensor<T>&, Shape);                                        \
  template Tensor<T> flatten<T>(const Tensor<T>&);                                               \
  template Tensor<T> mse_loss<T>(const Tensor<T>&, const Tensor<T>&);

VXAE_INSTANTIATE_BASIC(float)
VXAE_INSTANTIATE_BASIC(double)

}  // namespace vxae
