#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vxae/tensor.hpp"

namespace vxae {

// Ordered collection of named tensors. Trainable entries are parameters seen by the
// optimizer; the rest are buffers such as batch-norm running statistics.
template <typename T>
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor<T> tensor;
    bool trainable = true;
  };

  // Throws std::invalid_argument on a duplicate name.
  Tensor<T>& add(std::string name, Tensor<T> tensor, bool trainable);

  bool contains(std::string_view name) const;
  Tensor<T>& at(std::string_view name);
  const Tensor<T>& at(std::string_view name) const;

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Trainable tensors in insertion order; handles alias the stored tensors.
  std::vector<Tensor<T>> trainable() const;
  std::vector<std::string> trainable_names() const;
  std::int64_t trainable_count() const;

  // Entries whose name starts with `prefix` stop (or resume) receiving gradients.
  void set_trainable(std::string_view prefix, bool trainable);
  void zero_grad();

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;

}  // namespace vxae
