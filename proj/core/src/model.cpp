#include "vxae/model.hpp"

#include <bit>
#include <sstream>

#include "vxae/errors.hpp"

namespace vxae {

namespace {

BlockSpec conv(BlockKind kind, int c_in, int c_out, int kernel, int stride, Activation act) {
  BlockSpec b;
  b.kind = kind;
  b.c_in = c_in;
  b.c_out = c_out;
  b.kernel = kernel;
  b.stride = stride;
  b.activation = act;
  return b;
}

BlockSpec simple(BlockKind kind, int c_in, int c_out) {
  BlockSpec b;
  b.kind = kind;
  b.c_in = c_in;
  b.c_out = c_out;
  b.kernel = 1;
  return b;
}

BlockSpec mbconv(BlockKind kind, int c_in, int c_out, int stride, const ResidualPreset& p) {
  BlockSpec b;
  b.kind = kind;
  b.c_in = c_in;
  b.c_out = c_out;
  b.kernel = p.kernel;
  b.stride = stride;
  b.se_ratio = p.se_ratio;
  b.expand_factor = p.expand_factor;
  return b;
}

// Number of stride-2 reductions from input_dim down to a 4^3 bottleneck.
int reductions_to_bottleneck(int input_dim) {
  if (input_dim < 8 || !std::has_single_bit(static_cast<unsigned>(input_dim)))
    throw ShapeError("input_dim must be a power of two >= 8, got " + std::to_string(input_dim));
  return std::countr_zero(static_cast<unsigned>(input_dim)) - 2;
}

FeatureShape trace(const std::vector<BlockSpec>& blocks, FeatureShape shape, const char* stage,
                   std::vector<ShapeTraceRow>* rows) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    try {
      shape = output_shape(blocks[i], shape);
    } catch (const ShapeError& e) {
      throw ShapeError(std::string(stage) + " block " + std::to_string(i) + ": " + e.what());
    }
    if (rows) rows->push_back({stage, i, blocks[i], shape});
  }
  return shape;
}

}  // namespace

void ModelSpec::validate() const {
  if (input_dim < 1 || latent_dim < 1) throw ShapeError("model " + name + ": input_dim and latent_dim must be >= 1");
  for (const auto& b : encoder) b.validate();
  for (const auto& b : decoder) b.validate();
  const FeatureShape latent = trace(encoder, {1, input_dim}, "encoder", nullptr);
  if (latent != FeatureShape{latent_dim, 0})
    throw ShapeError("model " + name + ": encoder produces " + to_string(latent) + ", expected a flat latent of " +
                     std::to_string(latent_dim));
  const FeatureShape out = trace(decoder, latent, "decoder", nullptr);
  if (out != FeatureShape{1, input_dim})
    throw ShapeError("model " + name + ": decoder produces " + to_string(out) + ", expected " +
                     to_string(FeatureShape{1, input_dim}));
}

std::vector<ShapeTraceRow> shape_trace(const ModelSpec& spec) {
  std::vector<ShapeTraceRow> rows;
  const FeatureShape latent = trace(spec.encoder, {1, spec.input_dim}, "encoder", &rows);
  trace(spec.decoder, latent, "decoder", &rows);
  return rows;
}

std::int64_t count_encoder_params(const ModelSpec& spec) { return count_params(spec.encoder); }
std::int64_t count_decoder_params(const ModelSpec& spec) { return count_params(spec.decoder); }
std::int64_t count_params(const ModelSpec& spec) { return count_encoder_params(spec) + count_decoder_params(spec); }

std::string to_text(const ModelSpec& spec) {
  std::ostringstream os;
  os << "model " << spec.name << "\ninput_dim " << spec.input_dim << "\nlatent_dim " << spec.latent_dim << "\noutput "
     << activation_name(spec.output_activation) << "\nencoder\n";
  for (const auto& b : spec.encoder) os << to_text(b) << "\n";
  os << "decoder\n";
  for (const auto& b : spec.decoder) os << to_text(b) << "\n";
  os << "end\n";
  return os.str();
}

ModelSpec parse_model_spec(std::string_view text) {
  ModelSpec spec;
  spec.encoder.clear();
  spec.decoder.clear();
  enum class Section { Header, Encoder, Decoder, Done } section = Section::Header;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  auto fail = [&](const std::string& what) {
    throw FormatError("model spec line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    if (section == Section::Done) fail("content after 'end'");
    std::istringstream words(line);
    std::string key;
    words >> key;
    if (key == "encoder") {
      section = Section::Encoder;
      continue;
    }
    if (key == "decoder") {
      section = Section::Decoder;
      continue;
    }
    if (key == "end") {
      section = Section::Done;
      continue;
    }
    if (section == Section::Header) {
      std::string value, extra;
      if (!(words >> value) || (words >> extra)) fail("expected '<key> <value>'");
      try {
        if (key == "model") {
          spec.name = value;
        } else if (key == "input_dim") {
          spec.input_dim = std::stoi(value);
        } else if (key == "latent_dim") {
          spec.latent_dim = std::stoi(value);
        } else if (key == "output") {
          bool found = false;
          for (Activation a : {Activation::None, Activation::Relu, Activation::Silu, Activation::Sigmoid})
            if (value == activation_name(a)) {
              spec.output_activation = a;
              found = true;
            }
          if (!found) fail("unknown output activation '" + value + "'");
        } else {
          fail("unknown key '" + key + "'");
        }
      } catch (const std::logic_error&) {
        fail("malformed value '" + value + "'");
      }
      continue;
    }
    try {
      (section == Section::Encoder ? spec.encoder : spec.decoder).push_back(parse_block_spec(line));
    } catch (const FormatError& e) {
      fail(e.what());
    }
  }
  if (section != Section::Done) throw FormatError("model spec: missing 'end'");
  spec.validate();
  return spec;
}

ModelSpec build_baseline(int input_dim, int bottom_repeats, double dropout_rate) {
  if (bottom_repeats < 0) throw ShapeError("bottom_repeats must be >= 0");
  const int levels = reductions_to_bottleneck(input_dim);
  if (levels > 4) throw ShapeError("baseline supports input_dim up to 64, got " + std::to_string(input_dim));
  // Convolution widths per resolution level, outermost (64^3) first.
  const std::vector<std::vector<int>> widths = {{4, 4, 4}, {8, 8}, {8, 16}, {32, 32}};
  const int first = 4 - levels;

  ModelSpec spec;
  spec.name = "baseline";
  spec.input_dim = input_dim;
  BlockSpec drop = simple(BlockKind::Dropout, 1, 1);
  drop.dropout_rate = dropout_rate;
  auto dropout_at = [&](int channels) {
    BlockSpec d = drop;
    d.c_in = d.c_out = channels;
    return d;
  };

  std::vector<int> level_input(4, 1);
  int c = 1;
  for (int l = first; l < 4; ++l) {
    level_input[l] = c;
    for (int w : widths[l]) {
      spec.encoder.push_back(conv(BlockKind::Conv3D, c, w, 3, 1, Activation::Relu));
      c = w;
    }
    BlockSpec pool = simple(BlockKind::MaxPool3D, c, c);
    pool.kernel = 2;
    pool.stride = 2;
    spec.encoder.push_back(pool);
    if (l == 0) spec.encoder.push_back(dropout_at(c));
  }
  for (int r = 0; r < bottom_repeats; ++r) spec.encoder.push_back(conv(BlockKind::Conv3D, c, 32, 3, 1, Activation::Relu));
  const int bottom_in = bottom_repeats > 0 ? 32 : c;
  if (bottom_repeats > 0) c = 32;
  spec.encoder.push_back(conv(BlockKind::Conv3D, c, 4, 3, 1, Activation::Relu));
  spec.encoder.push_back(dropout_at(4));
  spec.encoder.push_back(simple(BlockKind::Flatten, 4, 4));
  spec.latent_dim = 4 * 4 * 4 * 4;

  BlockSpec reshape = simple(BlockKind::Reshape, spec.latent_dim, 4);
  reshape.side = 4;
  spec.decoder.push_back(reshape);
  spec.decoder.push_back(dropout_at(4));
  c = 4;
  spec.decoder.push_back(conv(BlockKind::Conv3DTranspose, c, bottom_in, 3, 1, Activation::Relu));
  c = bottom_in;
  for (int r = 0; r < bottom_repeats; ++r) spec.decoder.push_back(conv(BlockKind::Conv3DTranspose, 32, 32, 3, 1, Activation::Relu));
  for (int l = 3; l >= first; --l) {
    if (l == 0) spec.decoder.push_back(dropout_at(c));
    spec.decoder.push_back(conv(BlockKind::Conv3DTranspose, c, c, 2, 2, Activation::Relu));
    const auto& w = widths[l];
    for (int i = static_cast<int>(w.size()) - 1; i >= 0; --i) {
      const int to = i > 0 ? w[i - 1] : level_input[l];
      const bool last = l == first && i == 0;
      spec.decoder.push_back(conv(BlockKind::Conv3DTranspose, c, to, 3, 1, last ? Activation::None : Activation::Relu));
      c = to;
    }
  }
  spec.validate();
  return spec;
}

ResidualPreset residual_preset(std::string_view name) {
  ResidualPreset p;
  if (name == "default" || name.empty()) return p;
  if (name == "small") {
    p.name = "small";
    p.stem_channels = 8;
    p.stage_channels = {12, 16, 24, 24};
    return p;
  }
  if (name == "wide") {
    p.name = "wide";
    p.stem_channels = 12;
    p.stage_channels = {24, 32, 48, 48};
    return p;
  }
  throw FormatError("unknown residual preset '" + std::string(name) + "' (expected default, small or wide)");
}

ModelSpec build_residual(const ResidualPreset& preset, int input_dim) {
  if (preset.latent_dim != 256)
    throw ShapeError("residual preset '" + preset.name + "' yields a latent of " + std::to_string(preset.latent_dim) +
                     " values, expected 256");
  if (preset.stage_channels.size() != preset.stage_strides.size() || preset.stage_channels.empty())
    throw ShapeError("residual preset needs one stride per stage");
  const int reductions = reductions_to_bottleneck(input_dim);
  std::vector<int> strides = preset.stage_strides;
  int available = 1;
  for (int s : strides) available += s == 2 ? 1 : 0;
  if (reductions > available)
    throw ShapeError("residual preset cannot reduce " + std::to_string(input_dim) + "^3 to 4^3");
  for (std::size_t i = 0; i < strides.size() && available > reductions; ++i)
    if (strides[i] == 2) {
      strides[i] = 1;
      --available;
    }

  ModelSpec spec;
  spec.name = "residual";
  spec.input_dim = input_dim;
  spec.latent_dim = preset.latent_dim;
  BlockSpec stem = conv(BlockKind::Conv3D, 1, preset.stem_channels, preset.kernel, 2, Activation::Silu);
  stem.bias = false;
  stem.batch_norm = true;
  spec.encoder.push_back(stem);
  int c = preset.stem_channels;
  for (std::size_t i = 0; i < strides.size(); ++i) {
    spec.encoder.push_back(mbconv(BlockKind::MBConv3D, c, preset.stage_channels[i], strides[i], preset));
    c = preset.stage_channels[i];
  }
  spec.encoder.push_back(conv(BlockKind::Conv3D, c, preset.bottleneck_channels, 1, 1, Activation::None));
  spec.encoder.push_back(simple(BlockKind::Flatten, preset.bottleneck_channels, preset.bottleneck_channels));
  const int flat = preset.bottleneck_channels * 4 * 4 * 4;
  spec.encoder.push_back(simple(BlockKind::Dense, flat, preset.latent_dim));

  spec.decoder.push_back(simple(BlockKind::Dense, preset.latent_dim, flat));
  BlockSpec reshape = simple(BlockKind::Reshape, flat, preset.bottleneck_channels);
  reshape.side = 4;
  spec.decoder.push_back(reshape);
  BlockSpec widen = conv(BlockKind::Conv3D, preset.bottleneck_channels, c, 1, 1, Activation::None);
  widen.bias = false;
  widen.batch_norm = true;
  spec.decoder.push_back(widen);
  for (std::size_t i = strides.size(); i-- > 0;) {
    const int to = i > 0 ? preset.stage_channels[i - 1] : preset.stem_channels;
    spec.decoder.push_back(mbconv(BlockKind::MBConvTranspose3D, c, to, strides[i], preset));
    c = to;
  }
  BlockSpec unstem = conv(BlockKind::Conv3DTranspose, c, c, preset.kernel, 2, Activation::Silu);
  unstem.bias = false;
  unstem.batch_norm = true;
  spec.decoder.push_back(unstem);
  spec.decoder.push_back(conv(BlockKind::Conv3D, c, 1, 1, 1, Activation::None));
  spec.validate();
  return spec;
}

ModelSpec build_model(std::string_view name, int input_dim) {
  if (name == "baseline") return build_baseline(input_dim);
  if (name == "residual") return build_residual({}, input_dim);
  if (name.starts_with("residual:")) return build_residual(residual_preset(name.substr(9)), input_dim);
  throw FormatError("unknown model '" + std::string(name) + "' (expected baseline or residual[:preset])");
}

template <typename T>
Autoencoder<T>::Autoencoder(ModelSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
  spec_.validate();
  Rng rng(splitmix64(seed ^ 0x1d1a11e5ull));
  for (std::size_t i = 0; i < spec_.encoder.size(); ++i)
    init_block_params(spec_.encoder[i], "encoder." + std::to_string(i) + ".", params_, rng);
  for (std::size_t i = 0; i < spec_.decoder.size(); ++i)
    init_block_params(spec_.decoder[i], "decoder." + std::to_string(i) + ".", params_, rng);
}

template <typename T>
Tensor<T> Autoencoder<T>::encode(const Tensor<T>& x, Mode mode, std::uint64_t step) {
  const Shape expected{x.rank() > 0 ? x.dim(0) : 0, 1, spec_.input_dim, spec_.input_dim, spec_.input_dim};
  if (x.shape() != expected)
    throw ShapeError("model input " + shape_to_string(x.shape()) + " does not match " + shape_to_string(expected));
  Tensor<T> h = x;
  for (std::size_t i = 0; i < spec_.encoder.size(); ++i) {
    const BlockContext ctx{mode, {seed_, step, i}};
    h = block_forward(h, spec_.encoder[i], params_, "encoder." + std::to_string(i) + ".", ctx);
  }
  return h;
}

template <typename T>
Tensor<T> Autoencoder<T>::decode(const Tensor<T>& latent, Mode mode, std::uint64_t step) {
  if (latent.rank() != 2 || latent.dim(1) != spec_.latent_dim)
    throw ShapeError("latent " + shape_to_string(latent.shape()) + " does not have " +
                     std::to_string(spec_.latent_dim) + " features");
  Tensor<T> h = latent;
  for (std::size_t i = 0; i < spec_.decoder.size(); ++i) {
    const BlockContext ctx{mode, {seed_, step, spec_.encoder.size() + i}};
    h = block_forward(h, spec_.decoder[i], params_, "decoder." + std::to_string(i) + ".", ctx);
  }
  return apply_activation(h, spec_.output_activation);
}

template <typename T>
typename Autoencoder<T>::Output Autoencoder<T>::forward(const Tensor<T>& x, Mode mode, std::uint64_t step) {
  Output out;
  out.latent = encode(x, mode, step);
  out.recon = decode(out.latent, mode, step);
  return out;
}

template class Autoencoder<float>;
template class Autoencoder<double>;

}  // namespace vxae
