#pragma once

#include <initializer_list>

#include "vxae/tensor.hpp"

namespace vxae {

// Reverse-mode pass from a single-element tensor. Every reachable tensor with
// requires_grad receives d(loss)/d(tensor) added to its grad buffer. Recorded
// nodes are visited in reverse execution order.
template <typename T>
void backward(const Tensor<T>& loss);

bool grad_enabled() noexcept;

// Disables graph recording on the current thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {

std::uint64_t next_node_sequence() noexcept;

template <typename T>
bool any_requires_grad(std::initializer_list<const Tensor<T>*> inputs) {
  if (!grad_enabled()) return false;
  for (const auto* t : inputs)
    if (t != nullptr && t->defined() && t->requires_grad()) return true;
  return false;
}

// Wraps freshly computed values into an op result. When any input requires grad
// the result records `backward_fn`, which receives the output impl and pushes
// gradients into the inputs.
template <typename T, typename BackwardFn>
Tensor<T> make_result(Shape shape, std::vector<T> values,
                      std::initializer_list<const Tensor<T>*> inputs, BackwardFn&& backward_fn) {
  auto impl = std::make_shared<TensorImpl<T>>();
  impl->shape = std::move(shape);
  impl->values = std::move(values);
  if (any_requires_grad<T>(inputs)) {
    impl->requires_grad = true;
    auto node = std::make_shared<Node<T>>();
    node->sequence = next_node_sequence();
    for (const auto* t : inputs)
      if (t != nullptr && t->defined()) node->inputs.push_back(t->impl());
    node->backward = std::forward<BackwardFn>(backward_fn);
    impl->grad_fn = std::move(node);
  }
  return Tensor<T>(std::move(impl));
}

}  // namespace detail

}  // namespace vxae
