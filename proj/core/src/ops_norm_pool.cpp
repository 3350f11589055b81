#include <cmath>
#include <limits>

#include "vxae/autograd.hpp"
#include "vxae/errors.hpp"
#include "vxae/ops.hpp"

namespace vxae {

template <typename T>
Tensor<T> batch_norm(const Tensor<T>& input, const Tensor<T>& gamma, const Tensor<T>& beta, Tensor<T>& running_mean,
                     Tensor<T>& running_var, Mode mode, T momentum, T eps) {
  if (!input.defined() || input.rank() < 2) throw ShapeError("batch_norm: input must be [N,C,...]");
  const std::int64_t batch = input.dim(0), channels = input.dim(1);
  const std::int64_t volume = input.numel() / (batch * channels);
  const Shape param_shape{channels};
  for (const Tensor<T>* t : {&gamma, &beta, static_cast<const Tensor<T>*>(&running_mean),
                             static_cast<const Tensor<T>*>(&running_var)})
    if (!t->defined() || t->shape() != param_shape)
      throw ShapeError("batch_norm: per-channel tensors must be [" + std::to_string(channels) + "]");
  const double count = static_cast<double>(batch * volume);
  if (mode == Mode::Train && count < 2) throw ShapeError("batch_norm: train mode needs more than one value per channel");

  const auto x = input.values();
  std::vector<T> mean(static_cast<std::size_t>(channels));
  std::vector<T> inv_std(static_cast<std::size_t>(channels));
  if (mode == Mode::Train) {
    auto rm = running_mean.mutable_values();
    auto rv = running_var.mutable_values();
    for (std::int64_t c = 0; c < channels; ++c) {
      double s = 0.0;
      for (std::int64_t n = 0; n < batch; ++n) {
        const T* src = x.data() + (n * channels + c) * volume;
        for (std::int64_t i = 0; i < volume; ++i) s += src[i];
      }
      const double mu = s / count;
      double ss = 0.0;
      for (std::int64_t n = 0; n < batch; ++n) {
        const T* src = x.data() + (n * channels + c) * volume;
        for (std::int64_t i = 0; i < volume; ++i) {
          const double d = src[i] - mu;
          ss += d * d;
        }
      }
      const double var = ss / count;
      mean[c] = static_cast<T>(mu);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(eps)));
      rm[c] = (T(1) - momentum) * rm[c] + momentum * static_cast<T>(mu);
      rv[c] = (T(1) - momentum) * rv[c] + momentum * static_cast<T>(ss / (count - 1.0));
    }
  } else {
    for (std::int64_t c = 0; c < channels; ++c) {
      mean[c] = running_mean.values()[c];
      inv_std[c] = T(1) / std::sqrt(running_var.values()[c] + eps);
    }
  }

  const auto g = gamma.values(), b = beta.values();
  std::vector<T> xhat(x.size());
  std::vector<T> out(x.size());
  for (std::int64_t n = 0; n < batch; ++n)
    for (std::int64_t c = 0; c < channels; ++c) {
      const std::int64_t base = (n * channels + c) * volume;
      for (std::int64_t i = 0; i < volume; ++i) {
        xhat[base + i] = (x[base + i] - mean[c]) * inv_std[c];
        out[base + i] = g[c] * xhat[base + i] + b[c];
      }
    }

  auto xi = input.impl(), gi = gamma.impl(), bi = beta.impl();
  const bool train = mode == Mode::Train;
  return detail::make_result<T>(
      input.shape(), std::move(out), {&input, &gamma, &beta},
      [xi, gi, bi, train, batch, channels, volume, count, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](const detail::TensorImpl<T>& y) {
        const auto& dy = y.grad;
        for (std::int64_t c = 0; c < channels; ++c) {
          double sum_dy = 0.0, sum_dy_xhat = 0.0;
          for (std::int64_t n = 0; n < batch; ++n) {
            const std::int64_t base = (n * channels + c) * volume;
            for (std::int64_t i = 0; i < volume; ++i) {
              sum_dy += dy[base + i];
              sum_dy_xhat += static_cast<double>(dy[base + i]) * xhat[base + i];
            }
          }
          if (gi->requires_grad) gi->grad_buffer()[c] += static_cast<T>(sum_dy_xhat);
          if (bi->requires_grad) bi->grad_buffer()[c] += static_cast<T>(sum_dy);
          if (!xi->requires_grad) continue;
          auto dx = xi->grad_buffer();
          const T scale = gi->values[c] * inv_std[c];
          if (train) {
            const T mean_dy = static_cast<T>(sum_dy / count);
            const T mean_dy_xhat = static_cast<T>(sum_dy_xhat / count);
            for (std::int64_t n = 0; n < batch; ++n) {
              const std::int64_t base = (n * channels + c) * volume;
              for (std::int64_t i = 0; i < volume; ++i)
                dx[base + i] += scale * (dy[base + i] - mean_dy - xhat[base + i] * mean_dy_xhat);
            }
          } else {
            for (std::int64_t n = 0; n < batch; ++n) {
              const std::int64_t base = (n * channels + c) * volume;
              for (std::int64_t i = 0; i < volume; ++i) dx[base + i] += scale * dy[base + i];
            }
          }
        }
      });
}

template <typename T>
Tensor<T> max_pool3d(const Tensor<T>& input, int kernel, int stride) {
  if (!input.defined() || input.rank() != 5) throw ShapeError("max_pool3d: input must be [N,C,D,H,W]");
  if (kernel < 1) throw ShapeError("max_pool3d: kernel must be >= 1");
  const std::int64_t planes = input.dim(0) * input.dim(1);
  const std::int64_t d = input.dim(2), h = input.dim(3), w = input.dim(4);
  const std::int64_t od = conv_output_extent(d, kernel, stride, 0);
  const std::int64_t oh = conv_output_extent(h, kernel, stride, 0);
  const std::int64_t ow = conv_output_extent(w, kernel, stride, 0);
  const std::int64_t in_vol = d * h * w, out_vol = od * oh * ow;
  const auto x = input.values();

  std::vector<T> out(static_cast<std::size_t>(planes * out_vol));
  std::vector<std::int64_t> argmax(out.size());
  for (std::int64_t p = 0; p < planes; ++p) {
    const T* src = x.data() + p * in_vol;
    for (std::int64_t z = 0; z < od; ++z)
      for (std::int64_t y = 0; y < oh; ++y)
        for (std::int64_t xo = 0; xo < ow; ++xo) {
          T best = -std::numeric_limits<T>::infinity();
          std::int64_t best_idx = -1;
          for (int kd = 0; kd < kernel; ++kd)
            for (int kh = 0; kh < kernel; ++kh)
              for (int kw = 0; kw < kernel; ++kw) {
                const std::int64_t idx = ((z * stride + kd) * h + (y * stride + kh)) * w + (xo * stride + kw);
                if (best_idx < 0 || src[idx] > best) {
                  best = src[idx];
                  best_idx = idx;
                }
              }
          const std::int64_t o = p * out_vol + (z * oh + y) * ow + xo;
          out[o] = best;
          argmax[o] = p * in_vol + best_idx;
        }
  }
  auto xi = input.impl();
  return detail::make_result<T>(Shape{input.dim(0), input.dim(1), od, oh, ow}, std::move(out), {&input},
                                [xi, argmax = std::move(argmax)](const detail::TensorImpl<T>& yimpl) {
                                  auto dx = xi->grad_buffer();
                                  for (std::size_t o = 0; o < argmax.size(); ++o) dx[argmax[o]] += yimpl.grad[o];
                                });
}

template <typename T>
Tensor<T> global_avg_pool3d(const Tensor<T>& input) {
  if (!input.defined() || input.rank() != 5) throw ShapeError("global_avg_pool3d: input must be [N,C,D,H,W]");
  const std::int64_t planes = input.dim(0) * input.dim(1);
  const std::int64_t volume = input.numel() / planes;
  const auto x = input.values();
  std::vector<T> out(static_cast<std::size_t>(planes));
  for (std::int64_t p = 0; p < planes; ++p) {
    double s = 0.0;
    for (std::int64_t i = 0; i < volume; ++i) s += x[p * volume + i];
    out[p] = static_cast<T>(s / static_cast<double>(volume));
  }
  auto xi = input.impl();
  return detail::make_result<T>(Shape{input.dim(0), input.dim(1)}, std::move(out), {&input},
                                [xi, planes, volume](const detail::TensorImpl<T>& y) {
                                  auto dx = xi->grad_buffer();
                                  const T inv = T(1) / static_cast<T>(volume);
                                  for (std::int64_t p = 0; p < planes; ++p)
                                    for (std::int64_t i = 0; i < volume; ++i) dx[p * volume + i] += y.grad[p] * inv;
                                });
}

#define VXAE_INSTANTIATE_NORM_POOL(T)                                                                       \
  template Tensor<T> batch_norm<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, Tensor<T>&,        \
                                   Tensor<T>&, Mode, T, T);                                                 \
  template Tensor<T> max_pool3d<T>(const Tensor<T>&, int, int);                                             \
  template Tensor<T> global_avg_pool3d<T>(const Tensor<T>&);

VXAE_INSTANTIATE_NORM_POOL(float)
VXAE_INSTANTIATE_NORM_POOL(double)

}  // namespace vxae
