#include "vxae/param_store.hpp"

#include <stdexcept>

namespace vxae {

template <typename T>
Tensor<T>& ParamStore<T>::add(std::string name, Tensor<T> tensor, bool trainable) {
  if (lookup_.count(name)) throw std::invalid_argument("duplicate parameter name '" + name + "'");
  tensor.set_requires_grad(trainable);
  lookup_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(tensor), trainable});
  return entries_.back().tensor;
}

template <typename T>
bool ParamStore<T>::contains(std::string_view name) const {
  return lookup_.count(std::string(name)) > 0;
}

template <typename T>
Tensor<T>& ParamStore<T>::at(std::string_view name) {
  auto it = lookup_.find(std::string(name));
  if (it == lookup_.end()) throw std::out_of_range("no parameter named '" + std::string(name) + "'");
  return entries_[it->second].tensor;
}

template <typename T>
const Tensor<T>& ParamStore<T>::at(std::string_view name) const {
  return const_cast<ParamStore*>(this)->at(name);
}

template <typename T>
std::vector<Tensor<T>> ParamStore<T>::trainable() const {
  std::vector<Tensor<T>> out;
  for (const auto& e : entries_)
    if (e.trainable) out.push_back(e.tensor);
  return out;
}

template <typename T>
std::vector<std::string> ParamStore<T>::trainable_names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (e.trainable) out.push_back(e.name);
  return out;
}

template <typename T>
std::int64_t ParamStore<T>::trainable_count() const {
  std::int64_t n = 0;
  for (const auto& e : entries_)
    if (e.trainable) n += e.tensor.numel();
  return n;
}

template <typename T>
void ParamStore<T>::set_trainable(std::string_view prefix, bool trainable) {
  for (auto& e : entries_)
    if (e.name.starts_with(prefix) && !e.name.ends_with(".running_mean") && !e.name.ends_with(".running_var")) {
      e.trainable = trainable;
      e.tensor.set_requires_grad(trainable);
    }
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

template class ParamStore<float>;
template class ParamStore<double>;

}  // namespace vxae
