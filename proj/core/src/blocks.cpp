#include "vxae/blocks.hpp"

#include <algorithm>
#include <cmath>

#include "vxae/errors.hpp"

namespace vxae {

namespace {

template <typename T>
Tensor<T> he_normal(Shape shape, double fan_in, Rng& rng) {
  const double std = std::sqrt(2.0 / std::max(1.0, fan_in));
  const auto n = shape_numel(shape);
  std::vector<T> values(static_cast<std::size_t>(n));
  for (auto& v : values) v = static_cast<T>(std * rng.normal());
  return Tensor<T>::from_values(std::move(shape), std::move(values));
}

template <typename T>
void add_batch_norm(const std::string& prefix, int channels, ParamStore<T>& store) {
  const std::int64_t c = channels;
  store.add(prefix + "gamma", Tensor<T>::full({c}, T(1)), true);
  store.add(prefix + "beta", Tensor<T>::zeros({c}), true);
  store.add(prefix + "running_mean", Tensor<T>::zeros({c}), false);
  store.add(prefix + "running_var", Tensor<T>::full({c}, T(1)), false);
}

template <typename T>
Tensor<T>& checked(ParamStore<T>& store, const std::string& name, const Shape& expected) {
  if (!store.contains(name)) throw ShapeError("missing parameter '" + name + "'");
  Tensor<T>& t = store.at(name);
  if (t.shape() != expected)
    throw ShapeError("parameter '" + name + "' has shape " + shape_to_string(t.shape()) + ", spec implies " +
                     shape_to_string(expected));
  return t;
}

template <typename T>
Tensor<T> run_batch_norm(const Tensor<T>& x, ParamStore<T>& store, const std::string& prefix, int channels,
                         Mode mode) {
  const Shape c{channels};
  return batch_norm(x, checked(store, prefix + "gamma", c), checked(store, prefix + "beta", c),
                    checked(store, prefix + "running_mean", c), checked(store, prefix + "running_var", c), mode);
}

Shape cube_weight(std::int64_t a, std::int64_t b, std::int64_t k) { return {a, b, k, k, k}; }

double effective_fan_in(double taps, int stride, bool transposed) {
  return transposed ? taps / (double(stride) * stride * stride) : taps;
}

template <typename T>
void init_mbconv(const BlockSpec& spec, const std::string& prefix, ParamStore<T>& store, Rng& rng) {
  const bool transposed = spec.kind == BlockKind::MBConvTranspose3D;
  const int mid = expanded_channels(spec), se = block_se_width(spec);
  const std::int64_t k3 = std::int64_t(spec.kernel) * spec.kernel * spec.kernel;
  store.add(prefix + "expand.weight", he_normal<T>(cube_weight(mid, spec.c_in, 1), spec.c_in, rng), true);
  add_batch_norm<T>(prefix + "expand.bn.", mid, store);
  store.add(prefix + "depthwise.weight",
            he_normal<T>(cube_weight(mid, 1, spec.kernel), effective_fan_in(double(k3), spec.stride, transposed), rng),
            true);
  add_batch_norm<T>(prefix + "depthwise.bn.", mid, store);
  if (se > 0) {
    store.add(prefix + "se.w1", he_normal<T>({mid, se}, mid, rng), true);
    store.add(prefix + "se.b1", Tensor<T>::zeros({se}), true);
    store.add(prefix + "se.w2", he_normal<T>({se, mid}, se, rng), true);
    store.add(prefix + "se.b2", Tensor<T>::zeros({mid}), true);
  }
  store.add(prefix + "project.weight", he_normal<T>(cube_weight(spec.c_out, mid, 1), mid, rng), true);
  add_batch_norm<T>(prefix + "project.bn.", spec.c_out, store);
}

template <typename T>
Tensor<T> mbconv_common(const Tensor<T>& x, const BlockSpec& spec, ParamStore<T>& store, const std::string& prefix,
                        Mode mode, bool transposed) {
  const int mid = expanded_channels(spec), se = block_se_width(spec);
  if (x.rank() != 5 || x.dim(1) != spec.c_in)
    throw ShapeError(std::string(block_kind_name(spec.kind)) + ": input " + shape_to_string(x.shape()) +
                     " does not have " + std::to_string(spec.c_in) + " channels");
  Tensor<T> h = pointwise_conv3d(x, checked(store, prefix + "expand.weight", cube_weight(mid, spec.c_in, 1)));
  h = silu(run_batch_norm(h, store, prefix + "expand.bn.", mid, mode));
  const auto& dw = checked(store, prefix + "depthwise.weight", cube_weight(mid, 1, spec.kernel));
  h = transposed ? depthwise_conv3d_transpose(h, dw, spec.stride, resolved_padding(spec), resolved_output_padding(spec))
                 : depthwise_conv3d(h, dw, spec.stride, resolved_padding(spec));
  h = silu(run_batch_norm(h, store, prefix + "depthwise.bn.", mid, mode));
  if (se > 0) {
    const SqueezeExciteParams<T> gate{checked(store, prefix + "se.w1", {mid, se}), checked(store, prefix + "se.b1", {se}),
                                      checked(store, prefix + "se.w2", {se, mid}), checked(store, prefix + "se.b2", {mid})};
    h = squeeze_excite(h, gate);
  }
  h = pointwise_conv3d(h, checked(store, prefix + "project.weight", cube_weight(spec.c_out, mid, 1)));
  h = run_batch_norm(h, store, prefix + "project.bn.", spec.c_out, mode);
  if (spec.stride == 1 && spec.c_in == spec.c_out) h = add(h, x);
  return h;
}

}  // namespace

template <typename T>
Tensor<T> apply_activation(const Tensor<T>& x, Activation act) {
  switch (act) {
    case Activation::None: return x;
    case Activation::Relu: return relu(x);
    case Activation::Silu: return silu(x);
    case Activation::Sigmoid: return sigmoid(x);
  }
  return x;
}

template <typename T>
Tensor<T> squeeze_excite(const Tensor<T>& x, const SqueezeExciteParams<T>& p) {
  const Tensor<T> s = global_avg_pool3d(x);
  const Tensor<T> g = sigmoid(dense(silu(dense(s, p.w1, p.b1)), p.w2, p.b2));
  return scale_channels(x, g);
}

template <typename T>
void init_block_params(const BlockSpec& spec, const std::string& prefix, ParamStore<T>& store, Rng& rng) {
  spec.validate();
  const std::int64_t k3 = std::int64_t(spec.kernel) * spec.kernel * spec.kernel;
  switch (spec.kind) {
    case BlockKind::Conv3D:
    case BlockKind::Conv3DTranspose: {
      const bool transposed = spec.kind == BlockKind::Conv3DTranspose;
      const Shape w = transposed ? cube_weight(spec.c_in, spec.c_out, spec.kernel)
                                 : cube_weight(spec.c_out, spec.c_in, spec.kernel);
      store.add(prefix + "weight", he_normal<T>(w, effective_fan_in(double(spec.c_in * k3), spec.stride, transposed), rng),
                true);
      if (spec.bias) store.add(prefix + "bias", Tensor<T>::zeros({spec.c_out}), true);
      if (spec.batch_norm) add_batch_norm<T>(prefix + "bn.", spec.c_out, store);
      break;
    }
    case BlockKind::Dense:
      store.add(prefix + "weight", he_normal<T>({spec.c_in, spec.c_out}, spec.c_in, rng), true);
      if (spec.bias) store.add(prefix + "bias", Tensor<T>::zeros({spec.c_out}), true);
      break;
    case BlockKind::MBConv3D:
    case BlockKind::MBConvTranspose3D:
      init_mbconv(spec, prefix, store, rng);
      break;
    default:
      break;
  }
}

template <typename T>
Tensor<T> mbconv3d_forward(const Tensor<T>& x, const BlockSpec& spec, ParamStore<T>& store, const std::string& prefix,
                           Mode mode) {
  if (spec.kind != BlockKind::MBConv3D) throw ShapeError("mbconv3d_forward needs an MBConv3D spec");
  return mbconv_common(x, spec, store, prefix, mode, false);
}

template <typename T>
Tensor<T> mbconvtranspose3d_forward(const Tensor<T>& x, const BlockSpec& spec, ParamStore<T>& store,
                                    const std::string& prefix, Mode mode) {
  if (spec.kind != BlockKind::MBConvTranspose3D)
    throw ShapeError("mbconvtranspose3d_forward needs an MBConvTranspose3D spec");
  return mbconv_common(x, spec, store, prefix, mode, true);
}

template <typename T>
Tensor<T> block_forward(const Tensor<T>& x, const BlockSpec& spec, ParamStore<T>& store, const std::string& prefix,
                        const BlockContext& ctx) {
  switch (spec.kind) {
    case BlockKind::MBConv3D:
      return mbconv3d_forward(x, spec, store, prefix, ctx.mode);
    case BlockKind::MBConvTranspose3D:
      return mbconvtranspose3d_forward(x, spec, store, prefix, ctx.mode);
    case BlockKind::Conv3D:
    case BlockKind::Conv3DTranspose: {
      const bool transposed = spec.kind == BlockKind::Conv3DTranspose;
      const Shape ws = transposed ? cube_weight(spec.c_in, spec.c_out, spec.kernel)
                                  : cube_weight(spec.c_out, spec.c_in, spec.kernel);
      const Tensor<T>& w = checked(store, prefix + "weight", ws);
      const Tensor<T> b = spec.bias ? checked(store, prefix + "bias", {spec.c_out}) : Tensor<T>{};
      const int pad = resolved_padding(spec);
      Tensor<T> h;
      if (transposed)
        h = conv3d_transpose(x, w, b, spec.stride, pad, resolved_output_padding(spec));
      else if (spec.kernel == 1 && spec.stride == 1 && pad == 0)
        h = pointwise_conv3d(x, w, b);
      else
        h = conv3d(x, w, b, spec.stride, pad);
      if (spec.batch_norm) h = run_batch_norm(h, store, prefix + "bn.", spec.c_out, ctx.mode);
      return apply_activation(h, spec.activation);
    }
    case BlockKind::MaxPool3D:
      return max_pool3d(x, spec.kernel, spec.stride);
    case BlockKind::Dropout:
      return dropout(x, spec.dropout_rate, ctx.mode, ctx.dropout);
    case BlockKind::Dense: {
      const Tensor<T>& w = checked(store, prefix + "weight", {spec.c_in, spec.c_out});
      const Tensor<T> b = spec.bias ? checked(store, prefix + "bias", {spec.c_out}) : Tensor<T>{};
      return apply_activation(dense(x, w, b), spec.activation);
    }
    case BlockKind::Flatten:
      return flatten(x);
    case BlockKind::Reshape:
      return reshape(x, {x.dim(0), spec.c_out, spec.side, spec.side, spec.side});
  }
  throw ShapeError("unknown block kind");
}

#define VXAE_INSTANTIATE_BLOCKS(T)                                                                                   \
  template void init_block_params<T>(const BlockSpec&, const std::string&, ParamStore<T>&, Rng&);                     \
  template Tensor<T> block_forward<T>(const Tensor<T>&, const BlockSpec&, ParamStore<T>&, const std::string&,         \
                                      const BlockContext&);                                                           \
  template Tensor<T> mbconv3d_forward<T>(const Tensor<T>&, const BlockSpec&, ParamStore<T>&, const std::string&, Mode); \
  template Tensor<T> mbconvtranspose3d_forward<T>(const Tensor<T>&, const BlockSpec&, ParamStore<T>&,                 \
                                                  const std::string&, Mode);                                          \
  template Tensor<T> squeeze_excite<T>(const Tensor<T>&, const SqueezeExciteParams<T>&);                               \
  template Tensor<T> apply_activation<T>(const Tensor<T>&, Activation);

VXAE_INSTANTIATE_BLOCKS(float)
VXAE_INSTANTIATE_BLOCKS(double)

}  // namespace vxae
