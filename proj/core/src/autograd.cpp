#include "vxae/autograd.hpp"

#include <algorithm>
#include <atomic>
#include <unordered_set>

#include "vxae/errors.hpp"

namespace vxae {

namespace {

thread_local bool g_grad_enabled = true;
std::atomic<std::uint64_t> g_sequence{0};

}  // namespace

bool grad_enabled() noexcept { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

namespace detail {

std::uint64_t next_node_sequence() noexcept { return g_sequence.fetch_add(1, std::memory_order_relaxed) + 1; }

}  // namespace detail

template <typename T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1)
    throw ShapeError("backward() needs a single-element loss, got " +
                     (loss.defined() ? shape_to_string(loss.shape()) : std::string("undefined")));
  using Impl = detail::TensorImpl<T>;

  // Collect every recorded output reachable from the loss.
  std::vector<Impl*> order;
  std::unordered_set<const Impl*> seen;
  std::vector<Impl*> stack{loss.impl().get()};
  while (!stack.empty()) {
    Impl* t = stack.back();
    stack.pop_back();
    if (!seen.insert(t).second) continue;
    if (!t->grad_fn) continue;
    order.push_back(t);
    for (const auto& in : t->grad_fn->inputs)
      if (in->requires_grad) stack.push_back(in.get());
  }
  // Sequence numbers are assigned at execution time, so descending order is the
  // reverse of the forward pass.
  std::sort(order.begin(), order.end(),
            [](const Impl* a, const Impl* b) { return a->grad_fn->sequence > b->grad_fn->sequence; });

  auto* root = loss.impl().get();
  root->grad_buffer()[0] += T(1);
  for (Impl* t : order) {
    if (t->grad.empty()) continue;  // no gradient reached this node
    t->grad_fn->backward(*t);
  }
}

template void backward<float>(const Tensor<float>&);
template void backward<double>(const Tensor<double>&);

}  // namespace vxae
