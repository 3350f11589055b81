#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vxae/tensor.hpp"

namespace vxae {

template <typename T>
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  // One moment buffer per parameter, matching its element count. Empty until the first step.
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;

  void validate() const;
};

// One bias-corrected Adam update. grads[i] may be empty, meaning a zero gradient.
template <typename T>
void adam_step(std::span<Tensor<T>> params, std::span<const std::span<const T>> grads, AdamState<T>& state);

// Same update reading each parameter's accumulated gradient.
template <typename T>
void adam_step(std::span<Tensor<T>> params, AdamState<T>& state);

}  // namespace vxae
