#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace vxae {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

enum class Mode { Train, Eval };

namespace detail {

template <typename T>
struct TensorImpl;

// One recorded operation. `backward` reads the output's gradient and accumulates
// into the gradients of `inputs`.
template <typename T>
struct Node {
  std::uint64_t sequence = 0;
  std::vector<std::shared_ptr<TensorImpl<T>>> inputs;
  std::function<void(const TensorImpl<T>& out)> backward;
};

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> values;
  std::vector<T> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::shared_ptr<Node<T>> grad_fn;

  void accumulate_grad(std::span<const T> g);
  std::span<T> grad_buffer();  // allocates zeros on first use
};

}  // namespace detail

// Dense row-major array that can take part in a reverse-mode autodiff graph.
// Copies are shallow: two Tensor handles may alias the same storage, which is how
// parameter stores and optimizers share weights.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor from_values(Shape shape, std::vector<T> values, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const;
  std::int64_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  std::int64_t numel() const;

  std::span<const T> values() const;
  // In-place access for initializers and optimizer updates. Never use on op outputs
  // that are still needed by a pending backward pass.
  std::span<T> mutable_values();
  T item() const;

  bool requires_grad() const;
  void set_requires_grad(bool flag);
  bool has_grad() const;
  std::span<const T> grad() const;  // empty span when no gradient has been accumulated
  std::span<T> mutable_grad();      // allocates zeros
  void zero_grad();

  // True when this tensor was produced by a recorded op.
  bool has_grad_fn() const;
  // Drop the recorded history; values are kept.
  Tensor detach() const;
  Tensor clone() const;

  const std::shared_ptr<detail::TensorImpl<T>>& impl() const { return impl_; }
  explicit Tensor(std::shared_ptr<detail::TensorImpl<T>> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<detail::TensorImpl<T>> impl_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace vxae
