#include <gtest/gtest.h>

#include "grad_cases.hpp"

namespace vxae::testing {
namespace {

class ConvOracle : public ::testing::TestWithParam<std::size_t> {};

TEST_P(ConvOracle, MatchesBruteForce) {
  static const auto cases = conv_oracle_cases();
  const auto& c = cases[GetParam()];
  EXPECT_LT(c.max_abs_error(), 1e-10) << c.op << " " << c.config;
}

INSTANTIATE_TEST_SUITE_P(Grid, ConvOracle, ::testing::Range<std::size_t>(0, conv_oracle_cases().size()));

}  // namespace
}  // namespace vxae::testing
