#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vxae/blocks.hpp"
#include "vxae/errors.hpp"
#include "vxae/param_store.hpp"

namespace vxae {
namespace {

BlockSpec mbconv(BlockKind kind, int cin, int cout, int stride, int expand = 4, double se = 0.25) {
  BlockSpec b;
  b.kind = kind;
  b.c_in = cin;
  b.c_out = cout;
  b.stride = stride;
  b.expand_factor = expand;
  b.se_ratio = se;
  return b;
}

// Count by walking the initialized store, independent of the closed form.
std::int64_t store_count(const BlockSpec& spec) {
  ParamStore<float> store;
  Rng rng(1);
  init_block_params(spec, "x.", store, rng);
  return store.trainable_count();
}

TEST(BlockSpec, ValidateRejectsBadFields) {
  auto b = mbconv(BlockKind::MBConv3D, 4, 8, 3);
  EXPECT_THROW(b.validate(), FormatError);
  b.stride = 2;
  b.se_ratio = 1.5;
  EXPECT_THROW(b.validate(), FormatError);
  b.se_ratio = 0.25;
  b.c_in = 0;
  EXPECT_THROW(b.validate(), FormatError);
}

TEST(BlockSpec, TextRoundTrip) {
  for (auto kind : {BlockKind::MBConv3D, BlockKind::MBConvTranspose3D, BlockKind::Conv3D, BlockKind::Conv3DTranspose,
                    BlockKind::MaxPool3D, BlockKind::Dropout, BlockKind::Dense, BlockKind::Flatten}) {
    BlockSpec b = mbconv(kind, 3, 5, 2, 6, 0.5);
    b.activation = Activation::Silu;
    b.batch_norm = kind == BlockKind::Conv3D;
    b.dropout_rate = 0.3;
    if (kind == BlockKind::Dense || kind == BlockKind::Flatten || kind == BlockKind::Dropout ||
        kind == BlockKind::MaxPool3D)
      b.c_out = b.c_in;
    const auto text = to_text(b);
    const auto back = parse_block_spec(text);
    EXPECT_EQ(to_text(back), text);
  }
  EXPECT_THROW(parse_block_spec("Conv3D 1 2 3"), FormatError);
  EXPECT_THROW(parse_block_spec("Banana 1 2 3 1 0 1"), FormatError);
}

TEST(BlockSpec, ShapesFollowStrideAndPadding) {
  auto down = mbconv(BlockKind::MBConv3D, 8, 16, 2);
  EXPECT_EQ(output_shape(down, {8, 64}), (FeatureShape{16, 32}));
  EXPECT_EQ(output_shape(down, {8, 5}), (FeatureShape{16, 3}));
  auto up = mbconv(BlockKind::MBConvTranspose3D, 16, 8, 2);
  EXPECT_EQ(output_shape(up, {16, 4}), (FeatureShape{8, 8}));
  EXPECT_THROW(output_shape(up, {15, 4}), ShapeError);
  BlockSpec flat;
  flat.kind = BlockKind::Flatten;
  flat.c_in = flat.c_out = 4;
  EXPECT_EQ(output_shape(flat, {4, 4}), (FeatureShape{256, 0}));
}

TEST(BlockSpec, ExpandWidthConvention) {
  EXPECT_EQ(expanded_channels(mbconv(BlockKind::MBConv3D, 8, 16, 2)), 32);
  EXPECT_EQ(expanded_channels(mbconv(BlockKind::MBConvTranspose3D, 32, 24, 2)), 96);
  EXPECT_EQ(se_width(0.25, 6), 2);
  EXPECT_EQ(se_width(0.25, 1), 1);
  EXPECT_EQ(se_width(0.0, 8), 0);
}

TEST(BlockSpec, ClosedFormCountsMatchInitializedStores) {
  std::vector<BlockSpec> specs = {mbconv(BlockKind::MBConv3D, 8, 16, 2), mbconv(BlockKind::MBConv3D, 16, 16, 1, 6, 0.5),
                                  mbconv(BlockKind::MBConvTranspose3D, 32, 24, 2),
                                  mbconv(BlockKind::MBConvTranspose3D, 8, 8, 1, 2, 0.0)};
  BlockSpec c;
  c.kind = BlockKind::Conv3D;
  c.c_in = 4;
  c.c_out = 8;
  specs.push_back(c);
  c.batch_norm = true;
  c.bias = false;
  specs.push_back(c);
  c.kind = BlockKind::Conv3DTranspose;
  c.kernel = 2;
  c.stride = 2;
  specs.push_back(c);
  c.kind = BlockKind::Dense;
  c.c_in = 256;
  c.c_out = 100;
  c.bias = true;
  specs.push_back(c);
  for (const auto& s : specs) EXPECT_EQ(count_params(s), store_count(s)) << to_text(s);
  // Hand count for MBConv3D 8->16 s2, expand 4, SE width 2, k3:
  // expand 8*32 + 64, depthwise 32*27 + 64, SE 32*2+2+2*32+32, project 32*16 + 32.
  EXPECT_EQ(count_params(specs[0]), 256 + 64 + 864 + 64 + 64 + 2 + 64 + 32 + 512 + 32);
}

TEST(ParamStore, RejectsDuplicatesAndFreezesByPrefix) {
  ParamStore<float> store;
  store.add("a.w", Tensor<float>::zeros({2}), true);
  store.add("a.bn.running_mean", Tensor<float>::zeros({2}), false);
  store.add("b.w", Tensor<float>::zeros({3}), true);
  EXPECT_THROW(store.add("a.w", Tensor<float>::zeros({1}), true), std::invalid_argument);
  EXPECT_EQ(store.trainable_count(), 5);
  store.set_trainable("a.", false);
  EXPECT_EQ(store.trainable_names(), std::vector<std::string>{"b.w"});
  EXPECT_FALSE(store.at("a.w").requires_grad());
  store.set_trainable("a.", true);
  EXPECT_EQ(store.trainable_count(), 5);
  EXPECT_FALSE(store.entries()[1].trainable);
}

TEST(Blocks, ResidualSkipOnlyWhenShapesMatch) {
  // With every weight zeroed except batch-norm shifts, an identity-shaped MBConv block
  // returns x + beta_project, and a stride-2 block returns only beta_project.
  for (int stride : {1, 2}) {
    auto spec = mbconv(BlockKind::MBConv3D, 2, 2, stride);
    ParamStore<double> store;
    Rng rng(4);
    init_block_params(spec, "m.", store, rng);
    for (const auto& e : store.entries())
      if (e.trainable) std::fill(e.tensor.impl()->values.begin(), e.tensor.impl()->values.end(), 0.0);
    std::fill(store.at("m.project.bn.beta").mutable_values().begin(), store.at("m.project.bn.beta").mutable_values().end(),
              0.5);
    auto x = oracle::random_tensor<double>({1, 2, 4, 4, 4}, rng);
    auto y = block_forward(x, spec, store, "m.", BlockContext{Mode::Eval, {}});
    const double skip = stride == 1 ? x.values()[7] : 0.0;
    EXPECT_NEAR(y.values()[7], skip + 0.5, 1e-12) << "stride " << stride;
  }
}

TEST(Blocks, ShapeMismatchedParameterThrows) {
  auto spec = mbconv(BlockKind::MBConv3D, 4, 4, 1);
  ParamStore<float> store;
  Rng rng(1);
  init_block_params(spec, "m.", store, rng);
  store.at("m.se.w1") = Tensor<float>::zeros({3, 3});
  EXPECT_THROW(block_forward(Tensor<float>::zeros({1, 4, 2, 2, 2}), spec, store, "m.", BlockContext{}), ShapeError);
}

TEST(Blocks, HeInitHasExpectedSpread) {
  BlockSpec c;
  c.kind = BlockKind::Conv3D;
  c.c_in = 16;
  c.c_out = 64;
  ParamStore<double> store;
  Rng rng(8);
  init_block_params(c, "c.", store, rng);
  const auto w = store.at("c.weight").values();
  double ss = 0;
  for (double v : w) ss += v * v;
  EXPECT_NEAR(std::sqrt(ss / w.size()), std::sqrt(2.0 / (16 * 27)), 0.03 * std::sqrt(2.0 / (16 * 27)));
  for (double b : store.at("c.bias").values()) EXPECT_EQ(b, 0.0);
}

TEST(SqueezeExcite, GateMatchesManualComputation) {
  Rng rng(12);
  auto x = oracle::random_tensor<double>({1, 2, 2, 2, 2}, rng);
  auto w1 = oracle::random_tensor<double>({2, 1}, rng), b1 = oracle::random_tensor<double>({1}, rng);
  auto w2 = oracle::random_tensor<double>({1, 2}, rng), b2 = oracle::random_tensor<double>({2}, rng);
  auto y = squeeze_excite(x, SqueezeExciteParams<double>{w1, b1, w2, b2});
  double pooled[2] = {0, 0};
  for (int c = 0; c < 2; ++c)
    for (int i = 0; i < 8; ++i) pooled[c] += x.values()[c * 8 + i] / 8;
  const double h = pooled[0] * w1.values()[0] + pooled[1] * w1.values()[1] + b1.values()[0];
  const double hs = h / (1 + std::exp(-h));
  for (int c = 0; c < 2; ++c) {
    const double g = 1 / (1 + std::exp(-(hs * w2.values()[c] + b2.values()[c])));
    EXPECT_NEAR(y.values()[c * 8 + 3], x.values()[c * 8 + 3] * g, 1e-12);
  }
}

}  // namespace
}  // namespace vxae
