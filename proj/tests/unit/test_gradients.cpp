#include <gtest/gtest.h>

#include "grad_cases.hpp"

namespace vxae::testing {
namespace {

constexpr double kTolerance = 1e-4;

class OpGradient : public ::testing::TestWithParam<std::size_t> {};
class BlockGradient : public ::testing::TestWithParam<std::size_t> {};

const std::vector<GradCase>& op_cases() {
  static const auto cases = op_grad_cases();
  return cases;
}

const std::vector<GradCase>& block_cases() {
  static const auto cases = block_grad_cases();
  return cases;
}

TEST_P(OpGradient, MatchesFiniteDifferences) {
  const auto& c = op_cases()[GetParam()];
  const auto r = c.run();
  EXPECT_GT(r.checked, 0u) << c.op << " " << c.shape;
  EXPECT_LT(r.max_rel_error, kTolerance) << c.op << " " << c.shape;
}

TEST_P(BlockGradient, MatchesFiniteDifferences) {
  const auto& c = block_cases()[GetParam()];
  const auto r = c.run();
  EXPECT_GT(r.checked, 0u) << c.op << " " << c.shape;
  EXPECT_LT(r.max_rel_error, kTolerance) << c.op << " " << c.shape;
}

INSTANTIATE_TEST_SUITE_P(All, OpGradient, ::testing::Range<std::size_t>(0, op_grad_cases().size()));
INSTANTIATE_TEST_SUITE_P(All, BlockGradient, ::testing::Range<std::size_t>(0, block_grad_cases().size()));

TEST(GradCatalog, EveryOpHasFiveShapes) {
  std::map<std::string, int> counts;
  for (const auto& c : op_cases()) ++counts[c.op];
  for (const auto& c : block_cases()) ++counts[c.op];
  for (const auto& [op, n] : counts) {
    if (op.find("(eval)") != std::string::npos) continue;
    EXPECT_GE(n, 5) << op;
  }
}

}  // namespace
}  // namespace vxae::testing
