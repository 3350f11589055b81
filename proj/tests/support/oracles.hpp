#pragma once

// Independent reference implementations used as test oracles. They share no code
// with the library kernels: plain nested loops over the mathematical definitions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "vxae/autograd.hpp"
#include "vxae/ops.hpp"
#include "vxae/rng.hpp"
#include "vxae/tensor.hpp"

namespace vxae::oracle {

template <typename T>
Tensor<T> random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0, bool requires_grad = false) {
  std::vector<T> v(static_cast<std::size_t>(shape_numel(shape)));
  for (auto& x : v) x = static_cast<T>(lo + (hi - lo) * rng.uniform());
  return Tensor<T>::from_values(std::move(shape), std::move(v), requires_grad);
}

inline std::size_t idx5(const Shape& s, std::int64_t n, std::int64_t c, std::int64_t d, std::int64_t h, std::int64_t w) {
  return static_cast<std::size_t>((((n * s[1] + c) * s[2] + d) * s[3] + h) * s[4] + w);
}

// Grouped direct convolution. weight [Cout, Cin/groups, k, k, k].
inline std::vector<double> conv3d(const std::vector<double>& x, const Shape& xs, const std::vector<double>& w,
                                  const Shape& ws, const std::vector<double>& bias, int stride, int pad, int groups,
                                  Shape& ys) {
  const std::int64_t N = xs[0], Cin = xs[1], Cout = ws[0], k = ws[2];
  const std::int64_t cin_g = Cin / groups, cout_g = Cout / groups;
  std::int64_t out[3];
  for (int a = 0; a < 3; ++a) out[a] = (xs[2 + a] + 2 * pad - k) / stride + 1;
  ys = {N, Cout, out[0], out[1], out[2]};
  std::vector<double> y(static_cast<std::size_t>(shape_numel(ys)), 0.0);
  for (std::int64_t n = 0; n < N; ++n)
    for (std::int64_t co = 0; co < Cout; ++co)
      for (std::int64_t od = 0; od < out[0]; ++od)
        for (std::int64_t oh = 0; oh < out[1]; ++oh)
          for (std::int64_t ow = 0; ow < out[2]; ++ow) {
            double acc = bias.empty() ? 0.0 : bias[co];
            const std::int64_t g = co / cout_g;
            for (std::int64_t cl = 0; cl < cin_g; ++cl)
              for (std::int64_t kd = 0; kd < k; ++kd)
                for (std::int64_t kh = 0; kh < k; ++kh)
                  for (std::int64_t kw = 0; kw < k; ++kw) {
                    const std::int64_t id = od * stride - pad + kd, ih = oh * stride - pad + kh,
                                       iw = ow * stride - pad + kw;
                    if (id < 0 || ih < 0 || iw < 0 || id >= xs[2] || ih >= xs[3] || iw >= xs[4]) continue;
                    const std::int64_t ci = g * cin_g + cl;
                    acc += x[idx5(xs, n, ci, id, ih, iw)] * w[idx5(ws, co, cl, kd, kh, kw)];
                  }
            y[idx5(ys, n, co, od, oh, ow)] = acc;
          }
  return y;
}

// Grouped transposed convolution by explicit scatter. weight [Cin, Cout/groups, k, k, k].
inline std::vector<double> conv3d_transpose(const std::vector<double>& x, const Shape& xs,
                                            const std::vector<double>& w, const Shape& ws,
                                            const std::vector<double>& bias, int stride, int pad, int out_pad,
                                            int groups, Shape& ys) {
  const std::int64_t N = xs[0], Cin = xs[1], k = ws[2];
  const std::int64_t cin_g = Cin / groups, cout_g = ws[1], Cout = cout_g * groups;
  std::int64_t out[3];
  for (int a = 0; a < 3; ++a) out[a] = (xs[2 + a] - 1) * stride - 2 * pad + k + out_pad;
  ys = {N, Cout, out[0], out[1], out[2]};
  std::vector<double> y(static_cast<std::size_t>(shape_numel(ys)), 0.0);
  for (std::int64_t n = 0; n < N; ++n)
    for (std::int64_t ci = 0; ci < Cin; ++ci) {
      const std::int64_t g = ci / cin_g;
      for (std::int64_t id = 0; id < xs[2]; ++id)
        for (std::int64_t ih = 0; ih < xs[3]; ++ih)
          for (std::int64_t iw = 0; iw < xs[4]; ++iw)
            for (std::int64_t cl = 0; cl < cout_g; ++cl)
              for (std::int64_t kd = 0; kd < k; ++kd)
                for (std::int64_t kh = 0; kh < k; ++kh)
                  for (std::int64_t kw = 0; kw < k; ++kw) {
                    const std::int64_t od = id * stride - pad + kd, oh = ih * stride - pad + kh,
                                       ow = iw * stride - pad + kw;
                    if (od < 0 || oh < 0 || ow < 0 || od >= out[0] || oh >= out[1] || ow >= out[2]) continue;
                    const std::int64_t co = g * cout_g + cl;
                    y[idx5(ys, n, co, od, oh, ow)] += x[idx5(xs, n, ci, id, ih, iw)] * w[idx5(ws, ci, cl, kd, kh, kw)];
                  }
    }
  if (!bias.empty())
    for (std::int64_t n = 0; n < N; ++n)
      for (std::int64_t co = 0; co < Cout; ++co)
        for (std::int64_t i = 0; i < out[0] * out[1] * out[2]; ++i)
          y[static_cast<std::size_t>((n * Cout + co) * out[0] * out[1] * out[2] + i)] += bias[co];
  return y;
}

template <typename T>
std::vector<double> as_double(const Tensor<T>& t) {
  return std::vector<double>(t.values().begin(), t.values().end());
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <typename T>
double max_abs_diff(const Tensor<T>& t, const std::vector<double>& ref) {
  return max_abs_diff(as_double(t), ref);
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Central finite differences of a scalar function of several double tensors against
// reverse-mode gradients. `f` must rebuild its graph from the given inputs on every
// call. Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
inline GradCheckResult grad_check(const std::function<Tensor<double>(std::vector<Tensor<double>>&)>& f,
                                  std::vector<Tensor<double>> inputs, double floor = 1e-6) {
  for (auto& t : inputs) {
    t.set_requires_grad(true);
    t.zero_grad();
  }
  const Tensor<double> loss = f(inputs);
  backward(loss);
  std::vector<std::vector<double>> analytic;
  for (auto& t : inputs) {
    if (t.has_grad())
      analytic.emplace_back(t.grad().begin(), t.grad().end());
    else
      analytic.emplace_back(static_cast<std::size_t>(t.numel()), 0.0);
  }
  GradCheckResult result;
  NoGradGuard no_grad;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    auto values = inputs[i].mutable_values();
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double x0 = values[j];
      const double h = 1e-5 * std::max(1.0, std::abs(x0));
      values[j] = x0 + h;
      const double up = f(inputs).item();
      values[j] = x0 - h;
      const double down = f(inputs).item();
      values[j] = x0;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[i][j];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      result.max_rel_error = std::max(result.max_rel_error, rel);
      ++result.checked;
    }
  }
  return result;
}

}  // namespace vxae::oracle
