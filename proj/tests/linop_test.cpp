#include "proxsplit/linop.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace proxsplit;

TEST(LinOp, IdentityAndDims) {
  LinOp id = LinOp::identity(3);
  Vec x{1.0, 2.0, 3.0};
  Vec y = id.apply(x);
  EXPECT_DOUBLE_EQ(y[0], 1.0);
  EXPECT_DOUBLE_EQ(y[2], 3.0);
  EXPECT_THROW(id.apply(Vec{1.0}), DimensionError);
  EXPECT_THROW(id.adjoint(Vec{1.0, 2.0}), DimensionError);
}

TEST(LinOp, Diff1DForwardAndAdjoint) {
  LinOp d = LinOp::diff1d(3);
  Vec x{1.0, 4.0, 9.0};
  Vec y = d.apply(x);
  ASSERT_EQ(y.dim(), 2u);
  EXPECT_DOUBLE_EQ(y[0], 3.0);
  EXPECT_DOUBLE_EQ(y[1], 5.0);
  Vec u{2.0, 7.0};  // adjoint is the negative divergence (-a, a-b, b)
  Vec z = d.adjoint(u);
  EXPECT_DOUBLE_EQ(z[0], -2.0);
  EXPECT_DOUBLE_EQ(z[1], -5.0);
  EXPECT_DOUBLE_EQ(z[2], 7.0);
}

TEST(LinOp, DenseMatVec) {
  LinOp a = LinOp::dense(2, 2, {1.0, 2.0, 0.0, 1.0});
  Vec y = a.apply(Vec{1.0, 1.0});
  EXPECT_DOUBLE_EQ(y[0], 3.0);
  EXPECT_DOUBLE_EQ(y[1], 1.0);
}

TEST(LinOp, StackedApplyAndWeightedAdjoint) {
  LinOp s = LinOp::stacked({LinOp::identity(2), LinOp::identity(2)}, {0.5, 0.5});
  Vec u{2.0, 2.0, 4.0, 4.0};
  Vec z = s.adjoint(u);
  EXPECT_DOUBLE_EQ(z[0], 3.0);
  EXPECT_DOUBLE_EQ(z[1], 3.0);
  Vec x{1.0, -1.0};
  Vec y = s.apply(x);
  ASSERT_EQ(y.dim(), 4u);
  EXPECT_DOUBLE_EQ(y[2], 1.0);
}

// <Lx,u> = <x,L*u> over 100 random pairs per kind; the stacked kind pairs
// against the weighted inner product of its product space.
TEST(LinOp, AdjointConsistency) {
  std::mt19937_64 rng(11);
  std::vector<LinOp> plain = {
      LinOp::identity(6),
      testsupport::random_dense(rng, 4, 6),
      LinOp::diff1d(6),
      LinOp::scaled_sum({0.7, -1.3},
                        {testsupport::random_dense(rng, 4, 6),
                         testsupport::random_dense(rng, 4, 6)}),
  };
  for (const LinOp& op : plain) {
    for (int t = 0; t < 100; ++t) {
      Vec x = testsupport::random_vec(rng, op.in_dim());
      Vec u = testsupport::random_vec(rng, op.out_dim());
      const double lhs = dot(op.apply(x), u);
      const double rhs = dot(x, op.adjoint(u));
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (1.0 + norm(x) * norm(u)));
    }
  }
  LinOp l1 = testsupport::random_dense(rng, 3, 6);
  LinOp l2 = LinOp::diff1d(6);
  std::vector<double> w = {0.25, 0.75};
  LinOp st = LinOp::stacked({l1, l2}, w);
  for (int t = 0; t < 100; ++t) {
    Vec x = testsupport::random_vec(rng, 6);
    Vec u1 = testsupport::random_vec(rng, 3);
    Vec u2 = testsupport::random_vec(rng, 5);
    BlockVec lx({l1.apply(x), l2.apply(x)}, w);
    BlockVec uu({u1, u2}, w);
    const double lhs = weighted_inner(lx, uu);
    const double rhs = dot(x, st.adjoint(concat({u1, u2})));
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * (1.0 + norm(x) * (norm(u1) + norm(u2))));
  }
}

TEST(NormEstimate, DiagonalAndIdentity) {
  const double tol = 1e-6;
  LinOp d = LinOp::diag({3.0, -4.0});
  EXPECT_NEAR(estimate_norm(d, tol), 4.0 * (1.0 + tol), 1e-8);
  LinOp id = LinOp::identity(5);
  EXPECT_NEAR(estimate_norm(id, tol), 1.0 * (1.0 + tol), 1e-12);
}

// Independent reference: Jacobi eigensolve of the tridiagonal L L^T.
TEST(NormEstimate, Diff1DAgainstBruteForceEigensolve) {
  const std::size_t n = 50;
  LinOp d = LinOp::diff1d(n);
  const double tol = 1e-6;
  const double est = estimate_norm(d, tol);
  EXPECT_GE(est, 1.99 * (1.0 + tol) - 1e-9);
  EXPECT_LE(est, 2.0 * (1.0 + tol) + 1e-9);

  std::vector<double> llt((n - 1) * (n - 1), 0.0);
  for (std::size_t i = 0; i < n - 1; ++i) {
    llt[i * (n - 1) + i] = 2.0;
    if (i + 1 < n - 1) {
      llt[i * (n - 1) + i + 1] = -1.0;
      llt[(i + 1) * (n - 1) + i] = -1.0;
    }
  }
  auto ev = testsupport::jacobi_eigenvalues(llt, n - 1);
  double lmax = 0.0;
  for (double e : ev) lmax = std::max(lmax, e);
  EXPECT_NEAR(est, std::sqrt(lmax) * (1.0 + tol), 1e-6);
}

TEST(NormEstimate, BoundIsSoundOnRandomInputs) {
  std::mt19937_64 rng(5);
  std::vector<LinOp> ops = {testsupport::random_dense(rng, 7, 5), LinOp::diff1d(9),
                            LinOp::identity(4),
                            LinOp::stacked({LinOp::identity(5), LinOp::diff1d(5)},
                                           {0.5, 0.5})};
  for (const LinOp& op : ops) {
    const double bound = estimate_norm(op);
    for (int t = 0; t < 100; ++t) {
      Vec x = testsupport::random_vec(rng, op.in_dim());
      double lhs;
      if (op.kind() == OpKind::Stacked) {
        auto parts = split(op.apply(x), {op.parts()->at(0).out_dim(),
                                         op.parts()->at(1).out_dim()});
        BlockVec bx({parts[0], parts[1]}, *op.part_weights());
        lhs = weighted_norm(bx);
      } else {
        lhs = norm(op.apply(x));
      }
      EXPECT_LE(lhs, bound * norm(x) + 1e-10);
    }
  }
}

// ||L||^2 of the stacked operator equals ||sum_m w_m L_m^* L_m||.
TEST(NormEstimate, StackedGramIdentity) {
  std::mt19937_64 rng(17);
  LinOp l1 = testsupport::random_dense(rng, 4, 6);
  LinOp l2 = LinOp::diff1d(6);
  std::vector<double> w = {0.4, 0.6};
  LinOp st = LinOp::stacked({l1, l2}, w);
  const double tol = 1e-9;
  const double stacked = estimate_norm(st, tol);
  const double gramsum =
      estimate_norm(LinOp::scaled_sum(w, {gram(l1), gram(l2)}), tol);
  EXPECT_NEAR(stacked * stacked, gramsum, 1e-6 * gramsum);
}

TEST(NormEstimate, ZeroOperator) {
  EXPECT_DOUBLE_EQ(estimate_norm(LinOp::zero(4, 3)), 0.0);
}

TEST(LinOp, NormBoundPlumbing) {
  std::mt19937_64 rng(1);
  LinOp a = testsupport::random_dense(rng, 3, 3);
  EXPECT_FALSE(a.norm_bound().has_value());
  EXPECT_THROW(a.require_norm_bound(), MissingNormBound);
  LinOp b = certified(a);
  EXPECT_TRUE(b.norm_bound().has_value());
  EXPECT_GT(b.require_norm_bound(), 0.0);
}
