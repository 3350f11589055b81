#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "vxae/adam.hpp"
#include "vxae/errors.hpp"

namespace vxae {
namespace {

using oracle::random_tensor;

TEST(Tensor, CopiesAliasStorage) {
  auto a = Tensor<float>::zeros({2, 3});
  Tensor<float> b = a;
  b.mutable_values()[4] = 7.0f;
  EXPECT_EQ(a.values()[4], 7.0f);
  auto c = a.clone();
  c.mutable_values()[4] = 1.0f;
  EXPECT_EQ(a.values()[4], 7.0f);
}

TEST(Tensor, FromValuesChecksSize) {
  EXPECT_THROW(Tensor<double>::from_values({2, 2}, {1.0, 2.0, 3.0}), ShapeError);
  EXPECT_EQ(Tensor<double>::from_values({2, 2}, {1, 2, 3, 4}).numel(), 4);
  EXPECT_EQ(shape_to_string({1, 2, 3}), "[1,2,3]");
}

TEST(Autograd, GradientsAccumulateAcrossBackwardCalls) {
  auto x = Tensor<double>::from_values({3}, {1, 2, 3}, true);
  backward(sum(mul_scalar(x, 2.0)));
  backward(sum(mul_scalar(x, 2.0)));
  for (double g : x.grad()) EXPECT_DOUBLE_EQ(g, 4.0);
  x.zero_grad();
  EXPECT_TRUE(x.grad().empty() || x.grad()[0] == 0.0);
}

TEST(Autograd, SharedSubexpressionReceivesBothPaths) {
  auto x = Tensor<double>::from_values({2}, {0.5, -1.5}, true);
  auto y = silu(x);
  backward(sum(add(y, mul_scalar(y, 3.0))));
  for (int i = 0; i < 2; ++i) {
    const double v = x.values()[i], s = 1 / (1 + std::exp(-v));
    EXPECT_NEAR(x.grad()[i], 4 * (s + v * s * (1 - s)), 1e-12);
  }
}

TEST(Autograd, NoGradGuardRecordsNothing) {
  auto x = Tensor<double>::from_values({2}, {1, 2}, true);
  {
    NoGradGuard guard;
    auto y = mul_scalar(x, 3.0);
    EXPECT_FALSE(y.has_grad_fn());
    EXPECT_FALSE(y.requires_grad());
  }
  EXPECT_TRUE(mul_scalar(x, 3.0).has_grad_fn());
}

// The finite-difference harness must reject a wrong gradient, otherwise passing it
// says nothing.
TEST(GradCheck, DetectsWrongBackward) {
  auto bad_square = [](const Tensor<double>& x) {
    std::vector<double> v(x.values().begin(), x.values().end());
    for (auto& e : v) e *= e;
    return detail::make_result<double>(x.shape(), std::move(v), {&x}, [xi = x.impl()](const detail::TensorImpl<double>& out) {
      std::vector<double> g(out.grad.size());
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = out.grad[i] * xi->values[i];  // should be 2x
      xi->accumulate_grad(g);
    });
  };
  Rng rng(3);
  auto r = oracle::grad_check([&](std::vector<Tensor<double>>& in) { return sum(bad_square(in[0])); },
                              {random_tensor<double>({4}, rng, 0.5, 1.5)});
  EXPECT_GT(r.max_rel_error, 0.1);
}

TEST(Ops, ConvOutputExtents) {
  EXPECT_EQ(conv_output_extent(64, 3, 2, 1), 32);
  EXPECT_EQ(conv_output_extent(5, 3, 1, 0), 3);
  EXPECT_EQ(conv_transpose_output_extent(32, 3, 2, 1, 1), 64);
  EXPECT_EQ(conv_transpose_output_extent(4, 2, 2, 0, 0), 8);
}

TEST(Ops, ConvRejectsMismatchedChannels) {
  auto x = Tensor<float>::zeros({1, 2, 4, 4, 4});
  auto w = Tensor<float>::zeros({3, 4, 3, 3, 3});
  EXPECT_THROW(conv3d(x, w), ShapeError);
  EXPECT_THROW(conv3d(Tensor<float>::zeros({1, 4, 2, 2, 2}), w, {}, 1, 0), ShapeError);
}

TEST(Ops, FloatConvMatchesDoubleOracle) {
  Rng rng(11);
  const Shape xs{2, 8, 9, 9, 9};
  auto x = random_tensor<float>(xs, rng);
  auto w = random_tensor<float>({16, 8, 3, 3, 3}, rng);
  auto b = random_tensor<float>({16}, rng);
  Shape ys;
  auto ref = oracle::conv3d(oracle::as_double(x), xs, oracle::as_double(w), w.shape(), oracle::as_double(b), 2, 1, 1, ys);
  auto y = conv3d(x, w, b, 2, 1);
  ASSERT_EQ(y.shape(), ys);
  EXPECT_LT(oracle::max_abs_diff(y, ref), 1e-4);
}

TEST(Ops, MaxPoolTiesRouteToFirst) {
  auto x = Tensor<double>::full({1, 1, 2, 2, 2}, 1.0, true);
  backward(sum(max_pool3d(x, 2, 2)));
  EXPECT_EQ(x.grad()[0], 1.0);
  EXPECT_EQ(std::accumulate(x.grad().begin(), x.grad().end(), 0.0), 1.0);
}

TEST(Ops, BatchNormUpdatesRunningStatsOnlyInTrain) {
  Rng rng(5);
  auto x = random_tensor<double>({4, 2, 3, 3, 3}, rng, 1, 3);
  auto gamma = Tensor<double>::full({2}, 1.0), beta = Tensor<double>::zeros({2});
  auto mean = Tensor<double>::zeros({2}), var = Tensor<double>::full({2}, 1.0);
  batch_norm(x, gamma, beta, mean, var, Mode::Eval);
  EXPECT_EQ(mean.values()[0], 0.0);
  auto y = batch_norm(x, gamma, beta, mean, var, Mode::Train);
  // Independent batch statistics for channel 0.
  const int per = 4 * 27;
  double m = 0, s = 0;
  for (int n = 0; n < 4; ++n)
    for (int i = 0; i < 27; ++i) m += x.values()[(n * 2) * 27 + i];
  m /= per;
  for (int n = 0; n < 4; ++n)
    for (int i = 0; i < 27; ++i) s += std::pow(x.values()[(n * 2) * 27 + i] - m, 2);
  EXPECT_NEAR(mean.values()[0], 0.1 * m, 1e-12);
  EXPECT_NEAR(var.values()[0], 0.9 + 0.1 * s / (per - 1), 1e-12);
  EXPECT_NEAR(y.values()[0], (x.values()[0] - m) / std::sqrt(s / per + 1e-5), 1e-9);
}

TEST(Ops, DropoutIsKeyedAndScaled) {
  auto x = Tensor<double>::full({1, 10000}, 1.0);
  auto a = dropout(x, 0.25, Mode::Train, DropoutKey{1, 2, 3});
  auto b = dropout(x, 0.25, Mode::Train, DropoutKey{1, 2, 3});
  auto c = dropout(x, 0.25, Mode::Train, DropoutKey{1, 3, 3});
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
  int kept = 0;
  for (double v : a.values()) {
    if (v != 0.0) {
      EXPECT_NEAR(v, 1 / 0.75, 1e-12);
      ++kept;
    }
  }
  EXPECT_NEAR(kept / 10000.0, 0.75, 0.02);
  auto e = dropout(x, 0.25, Mode::Eval, DropoutKey{1, 2, 3});
  EXPECT_TRUE(std::all_of(e.values().begin(), e.values().end(), [](double v) { return v == 1.0; }));
}

TEST(Ops, MseLossOfZeroPredictionIsOccupancyFraction) {
  auto target = Tensor<double>::from_values({1, 8}, {1, 0, 0, 1, 0, 0, 0, 1});
  EXPECT_DOUBLE_EQ(mse_loss(Tensor<double>::zeros({1, 8}), target).item(), 3.0 / 8.0);
}

TEST(Adam, MatchesHandComputedSteps) {
  auto p = Tensor<double>::from_values({2}, {1.0, -2.0}, true);
  AdamState<double> st;
  st.lr = 0.1;
  std::vector<Tensor<double>> params{p};
  double m[2] = {0, 0}, v[2] = {0, 0}, ref[2] = {1.0, -2.0};
  const double g[2][2] = {{0.5, -1.0}, {0.25, 3.0}};
  for (int t = 1; t <= 2; ++t) {
    p.zero_grad();
    std::copy(g[t - 1], g[t - 1] + 2, p.mutable_grad().begin());
    adam_step<double>(params, st);
    for (int i = 0; i < 2; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[t - 1][i];
      v[i] = 0.999 * v[i] + 0.001 * g[t - 1][i] * g[t - 1][i];
      const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
      ref[i] -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(p.values()[i], ref[i], 1e-12);
    }
  }
  EXPECT_EQ(st.t, 2u);
}

TEST(Rng, SequenceIsFixed) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(splitmix64(0), 0xE220A8397B1DCDAFull);
  Rng c(1);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(c.below(7), 7u);
}

}  // namespace
}  // namespace vxae
