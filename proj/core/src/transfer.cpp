#include "vxae/transfer.hpp"

#include "vxae/autograd.hpp"
#include "vxae/errors.hpp"

namespace vxae {

Checkpoint export_encoder(const Autoencoder<float>& model) {
  Checkpoint c;
  c.spec_text = to_text(model.spec());
  c.seed = model.seed();
  for (const auto& e : model.params().entries())
    if (e.name.starts_with("encoder."))
      c.tensors.push_back({e.name, e.tensor.shape(), std::vector<float>(e.tensor.values().begin(), e.tensor.values().end())});
  return c;
}

FrozenEncoder::FrozenEncoder(const Checkpoint& ckpt) : spec_(parse_model_spec(ckpt.spec_text)) {
  Rng rng(0);
  for (std::size_t i = 0; i < spec_.encoder.size(); ++i)
    init_block_params(spec_.encoder[i], "encoder." + std::to_string(i) + ".", params_, rng);
  load_model_tensors(ckpt, params_, "encoder.");
  params_.set_trainable("encoder.", false);
}

Tensor<float> FrozenEncoder::encode(const Tensor<float>& x) {
  Tensor<float> h = x;
  for (std::size_t i = 0; i < spec_.encoder.size(); ++i)
    h = block_forward(h, spec_.encoder[i], params_, "encoder." + std::to_string(i) + ".", BlockContext{Mode::Eval, {}});
  return h;
}

ClassifierHead::ClassifierHead(int latent_dim, int classes, std::uint64_t seed) : classes_(classes) {
  BlockSpec spec;
  spec.kind = BlockKind::Dense;
  spec.c_in = latent_dim;
  spec.c_out = classes;
  Rng rng(seed);
  init_block_params(spec, "head.", params_, rng);
}

Tensor<float> ClassifierHead::forward(const Tensor<float>& latent) {
  return dense(latent, params_.at("head.weight"), params_.at("head.bias"));
}

double ClassifierHead::train_step(const Tensor<float>& latent, std::span<const int> labels, AdamState<float>& adam) {
  if (latent.rank() != 2 || static_cast<std::size_t>(latent.dim(0)) != labels.size())
    throw ShapeError("classifier head: one label per latent row required");
  std::vector<float> onehot(labels.size() * classes_, 0.0f);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes_) throw std::invalid_argument("classifier head: label out of range");
    onehot[i * classes_ + labels[i]] = 1.0f;
  }
  const auto target = Tensor<float>::from_values({latent.dim(0), classes_}, std::move(onehot));
  params_.zero_grad();
  const Tensor<float> loss = mse_loss(forward(latent.detach()), target);
  backward(loss);
  auto trainable = params_.trainable();
  adam_step<float>(trainable, adam);
  return loss.item();
}

}  // namespace vxae
