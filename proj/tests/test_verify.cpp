#include <gtest/gtest.h>

#include "dcg.hpp"

using namespace dcg;

TEST(SumResidual, RingIsExactlyBalanced) {
  const GameParams p{1.0, 1.0, 1.0, 10.0, 1.0, 1};
  const auto s = solve_periodic_chain(p, 4, TimeGrid(10.0, 1e-2));
  EXPECT_LT(weighted_sum_residual(s), 1e-12);
}

TEST(SumResidual, ShrinksWithDepth) {
  const GameParams p{1.0, 1.0, 1.0, 2.0, 1.0, 1};
  const TimeGrid g(2.0, 1e-2);
  const double a = weighted_sum_residual(solve_infinite_chain(p, 10, g));
  const double b = weighted_sum_residual(solve_infinite_chain(p, 30, g));
  const double c = weighted_sum_residual(solve_infinite_chain(p, 60, g));
  EXPECT_GT(a, b);
  EXPECT_GT(b, c);
  EXPECT_LT(c, 1e-4);
}

TEST(Conjecture, ProductSumDecreases) {
  const GameParams p{1.0, 1.0, 1.0, 10.0, 1.0, 1};
  const auto r = conjecture_decay(p, {4, 8, 16, 32}, TimeGrid(10.0, 1e-2), 2, true);
  ASSERT_EQ(r.points.size(), 4u);
  EXPECT_TRUE(r.strictly_decreasing);
  EXPECT_LT(r.decay_exponent, 0.0);
  EXPECT_EQ(r.curves.size(), 4u);
  for (const auto& pt : r.points) {
    EXPECT_TRUE(pt.error.empty());
    EXPECT_GT(pt.r, 0.0);
    EXPECT_LT(pt.sum_residual, 1e-10);
  }
  const auto s = solve_periodic_chain(p, 8, TimeGrid(10.0, 1e-2));
  EXPECT_DOUBLE_EQ(r.points[1].r, ring_product_sum(s));
}

TEST(Conjecture, RejectsBadSizes) {
  const GameParams p{1.0, 1.0, 1.0, 1.0, 1.0, 1};
  const TimeGrid g(1.0, 0.1);
  EXPECT_THROW(conjecture_decay(p, {}, g), ValidationError);
  EXPECT_THROW(conjecture_decay(p, {2, 8}, g), ValidationError);
  EXPECT_THROW(conjecture_decay(p, {8, 4}, g), ValidationError);
}

TEST(BoundaryConditions, InteriorIsIndependent) {
  const GameParams p{1.0, 1.0, 1.0, 2.0, 1.0, 1};
  const auto r = bc_independence(p, 6, TimeGrid(2.0, 1e-3));
  EXPECT_EQ(r.interior_max_diff, 0.0);
  EXPECT_GT(r.column_max_diff, 1e-3);
  EXPECT_LT(r.general_max_diff, 1e-12);
  EXPECT_EQ(r.general_psi_max, 0.0);
  EXPECT_TRUE(bc_report(p, 6, TimeGrid(2.0, 1e-3)).passed());
  EXPECT_THROW(bc_independence(p, 2, TimeGrid(2.0, 1e-3)), ValidationError);
}

TEST(IdentitySuite, DeepChecksPassAndShallowOnesShowTruncation) {
  const auto r = identity_suite(1e-2);
  std::vector<double> chain, tree;
  for (const auto& p : r.points) {
    EXPECT_TRUE(p.error.empty()) << p.label << ": " << p.error;
    if (p.label == "chain-sum") chain.push_back(p.residual);
    else if (p.label == "tree-sum") tree.push_back(p.residual);
    else EXPECT_TRUE(p.pass()) << p.label << " " << p.residual;
  }
  ASSERT_EQ(chain.size(), 2u);
  ASSERT_EQ(tree.size(), 2u);
  EXPECT_GT(chain[0], 10 * chain[1]);
  EXPECT_LT(chain[1], 1e-4);
  EXPECT_GT(tree[0], 10 * tree[1]);
  EXPECT_LT(tree[1], 1e-3);
  EXPECT_THROW(r.point("missing"), ValidationError);
}

TEST(CheckPoint, PassSemantics) {
  EXPECT_TRUE((CheckPoint{"a", {}, 1e-5, 1e-4, true, ""}).pass());
  EXPECT_FALSE((CheckPoint{"a", {}, 1e-3, 1e-4, true, ""}).pass());
  EXPECT_TRUE((CheckPoint{"a", {}, 1e-3, 1e-4, false, ""}).pass());
  EXPECT_FALSE((CheckPoint{"a", {}, 0, 1e-4, true, "boom"}).pass());
  EXPECT_FALSE((CheckPoint{"a", {}, std::nan(""), 1e-4, true, ""}).pass());
}
