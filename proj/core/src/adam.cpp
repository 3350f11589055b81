#include "vxae/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "vxae/errors.hpp"

namespace vxae {

template <typename T>
void AdamState<T>::validate() const {
  if (!(lr >= 0.0)) throw std::invalid_argument("adam: lr must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw std::invalid_argument("adam: betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("adam: eps must be > 0");
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const std::span<const T>> grads, AdamState<T>& state) {
  state.validate();
  if (grads.size() != params.size()) throw ShapeError("adam_step: one gradient per parameter required");
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(static_cast<std::size_t>(params[i].numel()), T(0));
      state.v[i].assign(static_cast<std::size_t>(params[i].numel()), T(0));
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: optimizer state tracks a different parameter list");

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  const T b1 = static_cast<T>(state.beta1), b2 = static_cast<T>(state.beta2);
  const T step_size = static_cast<T>(state.lr / correction1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(correction2));
  const T eps = static_cast<T>(state.eps);

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].mutable_values();
    auto& m = state.m[i];
    auto& v = state.v[i];
    if (m.size() != p.size() || v.size() != p.size())
      throw ShapeError("adam_step: moment buffer size does not match parameter " + std::to_string(i));
    const auto g = grads[i];
    if (!g.empty() && g.size() != p.size()) throw ShapeError("adam_step: gradient size mismatch for parameter " + std::to_string(i));
    for (std::size_t j = 0; j < p.size(); ++j) {
      const T gj = g.empty() ? T(0) : g[j];
      m[j] = b1 * m[j] + (T(1) - b1) * gj;
      v[j] = b2 * v[j] + (T(1) - b2) * gj * gj;
      p[j] -= step_size * m[j] / (std::sqrt(v[j]) * inv_sqrt_c2 + eps);
    }
  }
}

template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state) {
  std::vector<std::span<const T>> grads;
  grads.reserve(params.size());
  for (auto& p : params) grads.push_back(p.grad());
  adam_step<T>(params, std::span<const std::span<const T>>(grads), state);
}

template struct AdamState<float>;
template struct AdamState<double>;
template void adam_step<float>(std::span<Tensor<float>>, std::span<const std::span<const float>>, AdamState<float>&);
template void adam_step<double>(std::span<Tensor<double>>, std::span<const std::span<const double>>,
                                AdamState<double>&);
template void adam_step<float>(std::span<Tensor<float>>, AdamState<float>&);
template void adam_step<double>(std::span<Tensor<double>>, AdamState<double>&);

}  // namespace vxae
