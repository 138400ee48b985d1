#include "proxsplit/vec.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "test_support.hpp"

using namespace proxsplit;

TEST(Vec, RejectsNonFiniteEntries) {
  EXPECT_THROW(Vec::of({1.0, std::numeric_limits<double>::quiet_NaN()}), ContractViolation);
  EXPECT_THROW(Vec::of({std::numeric_limits<double>::infinity()}), ContractViolation);
  EXPECT_NO_THROW(Vec::of({1.0, -2.0, 0.0}));
}

TEST(Vec, Arithmetic) {
  Vec a{1.0, 2.0, 3.0};
  Vec b{0.5, -1.0, 2.0};
  Vec c = a + 2.0 * b;
  EXPECT_DOUBLE_EQ(c[0], 2.0);
  EXPECT_DOUBLE_EQ(c[1], 0.0);
  EXPECT_DOUBLE_EQ(c[2], 7.0);
  EXPECT_DOUBLE_EQ(dot(a, b), 4.5);
  EXPECT_THROW(dot(a, Vec{1.0}), DimensionError);
}

TEST(Vec, RelaxedCombination) {
  Vec a{1.0, 1.0};
  Vec b{3.0, -1.0};
  Vec r = relaxed(a, b, 0.5);
  EXPECT_DOUBLE_EQ(r[0], 2.0);
  EXPECT_DOUBLE_EQ(r[1], 0.0);
  // rho = 0 freezes, rho = 1 lands on b
  EXPECT_DOUBLE_EQ(relaxed(a, b, 0.0)[0], 1.0);
  EXPECT_DOUBLE_EQ(relaxed(a, b, 1.0)[0], 3.0);
}

TEST(Vec, ConcatSplitRoundTrip) {
  Vec a{1.0, 2.0};
  Vec b{3.0};
  Vec cat = concat({a, b});
  ASSERT_EQ(cat.dim(), 3u);
  auto parts = split(cat, {2, 1});
  EXPECT_DOUBLE_EQ(parts[0][1], 2.0);
  EXPECT_DOUBLE_EQ(parts[1][0], 3.0);
  EXPECT_THROW(split(cat, {2, 2}), DimensionError);
}

TEST(Vec, OrderedSumIsPermutationInvariantBitwise) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec> parts;
    for (int m = 0; m < 5; ++m) parts.push_back(testsupport::random_vec(rng, 13));
    Vec s1 = sum_ordered(parts);
    std::vector<Vec> perm = {parts[3], parts[0], parts[4], parts[2], parts[1]};
    Vec s2 = sum_ordered(perm);
    for (std::size_t i = 0; i < s1.dim(); ++i) EXPECT_EQ(s1[i], s2[i]);
  }
}

// spec'd cases for the weighted block inner product
TEST(BlockVec, WeightedInner) {
  BlockVec a({Vec{1.0}, Vec{1.0}}, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(weighted_inner(a, a), 2.0);

  BlockVec b({Vec{2.0}, Vec{2.0}}, {0.25, 0.75});
  EXPECT_DOUBLE_EQ(weighted_inner(b, b), 4.0 * 0.25 + 4.0 * 0.75);

  BlockVec c({Vec{1.0, 0.0}}, {2.0});
  BlockVec d({Vec{0.0, 1.0}}, {2.0});
  EXPECT_DOUBLE_EQ(weighted_inner(c, d), 0.0);
}

TEST(BlockVec, RejectsNonPositiveWeights) {
  EXPECT_THROW(BlockVec({Vec{1.0}}, {0.0}), StructureError);
  EXPECT_THROW(BlockVec({Vec{1.0}}, {-1.0}), StructureError);
  EXPECT_THROW(BlockVec({Vec{1.0}, Vec{2.0}}, {1.0}), StructureError);
}

// bilinearity and positive definiteness on random data
TEST(BlockVec, InnerProductProperties) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto mk = [&rng](std::mt19937_64&) {
      return BlockVec({testsupport::random_vec(rng, 4), testsupport::random_vec(rng, 2)},
                      {0.3, 0.7});
    };
    BlockVec a = mk(rng), b = mk(rng), c = mk(rng);
    const double alpha = 1.37;
    BlockVec ab({a.blocks[0] + alpha * b.blocks[0], a.blocks[1] + alpha * b.blocks[1]},
                a.weights);
    EXPECT_NEAR(weighted_inner(ab, c),
                weighted_inner(a, c) + alpha * weighted_inner(b, c), 1e-12);
    EXPECT_NEAR(weighted_inner(a, b), weighted_inner(b, a), 0.0);
    EXPECT_GT(weighted_inner(a, a), 0.0);
  }
}
