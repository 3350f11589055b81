#include "vxae/tensor.hpp"

#include <algorithm>
#include <sstream>

#include "vxae/errors.hpp"

namespace vxae {

std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (auto e : shape) {
    if (e < 1) throw ShapeError("tensor extents must be positive, got " + shape_to_string(shape));
    n *= e;
  }
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

namespace detail {

template <typename T>
std::span<T> TensorImpl<T>::grad_buffer() {
  if (grad.empty()) grad.assign(values.size(), T(0));
  return grad;
}

template <typename T>
void TensorImpl<T>::accumulate_grad(std::span<const T> g) {
  auto dst = grad_buffer();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
}

template struct TensorImpl<float>;
template struct TensorImpl<double>;

}  // namespace detail

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  const auto n = static_cast<std::size_t>(shape_numel(shape));
  return from_values(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from_values(Shape shape, std::vector<T> values, bool requires_grad) {
  if (static_cast<std::size_t>(shape_numel(shape)) != values.size())
    throw ShapeError("value count " + std::to_string(values.size()) + " does not match shape " +
                     shape_to_string(shape));
  auto impl = std::make_shared<detail::TensorImpl<T>>();
  impl->shape = std::move(shape);
  impl->values = std::move(values);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return from_values({}, {value}, requires_grad);
}

template <typename T>
const Shape& Tensor<T>::shape() const {
  return impl_->shape;
}

template <typename T>
std::int64_t Tensor<T>::dim(std::size_t axis) const {
  if (axis >= impl_->shape.size())
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + shape_to_string(impl_->shape));
  return impl_->shape[axis];
}

template <typename T>
std::int64_t Tensor<T>::numel() const {
  return static_cast<std::int64_t>(impl_->values.size());
}

template <typename T>
std::span<const T> Tensor<T>::values() const {
  return impl_->values;
}

template <typename T>
std::span<T> Tensor<T>::mutable_values() {
  return impl_->values;
}

template <typename T>
T Tensor<T>::item() const {
  if (impl_->values.size() != 1) throw ShapeError("item() needs a single-element tensor, got " + shape_to_string(shape()));
  return impl_->values[0];
}

template <typename T>
bool Tensor<T>::requires_grad() const {
  return impl_->requires_grad;
}

template <typename T>
void Tensor<T>::set_requires_grad(bool flag) {
  impl_->requires_grad = flag;
}

template <typename T>
bool Tensor<T>::has_grad() const {
  return !impl_->grad.empty();
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  return impl_->grad;
}

template <typename T>
std::span<T> Tensor<T>::mutable_grad() {
  return impl_->grad_buffer();
}

template <typename T>
void Tensor<T>::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
bool Tensor<T>::has_grad_fn() const {
  return impl_->grad_fn != nullptr;
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  auto impl = std::make_shared<detail::TensorImpl<T>>();
  impl->shape = impl_->shape;
  impl->values = impl_->values;
  return Tensor(std::move(impl));
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  auto copy = detach();
  copy.impl_->requires_grad = impl_->requires_grad;
  return copy;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace vxae
