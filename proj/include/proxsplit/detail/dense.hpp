#pragma once

// Small dense linear algebra used behind the prox catalog and the oracles.
// Desk-scale problems only, so materializing operators and factorizing per
// call is cheap.

#include <Eigen/Dense>

#include "proxsplit/errors.hpp"
#include "proxsplit/linop.hpp"
#include "proxsplit/vec.hpp"

namespace proxsplit::detail {

using Matrix = Eigen::MatrixXd;
using EVec = Eigen::VectorXd;

inline EVec to_eigen(const Vec& x) {
  return Eigen::Map<const EVec>(x.data(), static_cast<Eigen::Index>(x.dim()));
}

inline Vec from_eigen(const EVec& x) {
  return Vec::raw(std::vector<double>(x.data(), x.data() + x.size()));
}

// Apply op to the canonical basis; only sensible at desk scale.
inline Matrix materialize(const LinOp& op) {
  const auto n = static_cast<Eigen::Index>(op.in_dim());
  const auto m = static_cast<Eigen::Index>(op.out_dim());
  Matrix a(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vec e(op.in_dim());
    e[static_cast<std::size_t>(j)] = 1.0;
    Vec col = op.apply(e);
    a.col(j) = to_eigen(col);
  }
  return a;
}

// Conjugate gradient on a symmetric positive definite map, tolerance on the
// relative residual. Used as the fallback when a Cholesky factorization is
// refused.
inline Vec conjugate_gradient(const std::function<Vec(const Vec&)>& apply,
                              const Vec& rhs, double tol = 1e-12,
                              int max_iter = 10000) {
  Vec x(rhs.dim());
  Vec r = rhs;
  Vec p = r;
  double rs = norm_sq(r);
  const double stop = tol * tol * std::max(norm_sq(rhs), 1e-300);
  for (int k = 0; k < max_iter && rs > stop; ++k) {
    Vec ap = apply(p);
    const double alpha = rs / dot(p, ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rs_new = norm_sq(r);
    p = axpy(rs_new / rs, p, r);
    rs = rs_new;
  }
  return x;
}

// Solve (A) x = b with A symmetric positive definite, Cholesky first and
// conjugate gradient at 1e-12 as fallback.
inline Vec solve_spd(const Matrix& a, const Vec& b) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) {
    EVec x = llt.solve(to_eigen(b));
    return from_eigen(x);
  }
  Matrix ac = a;
  auto apply = [&ac](const Vec& v) { return from_eigen(ac * to_eigen(v)); };
  return conjugate_gradient(apply, b);
}

// General square solve with partial pivoting; throws when the matrix is
// numerically singular.
inline Vec solve_lu(const Matrix& a, const Vec& b, const char* what) {
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible())
    throw SingularSystemError(std::string(what) + ": singular linear system");
  EVec x = lu.solve(to_eigen(b));
  return from_eigen(x);
}

inline bool is_symmetric(const Matrix& a, double tol = 1e-10) {
  return (a - a.transpose()).cwiseAbs().maxCoeff() <=
         tol * std::max(1.0, a.cwiseAbs().maxCoeff());
}

inline double min_eigenvalue_sym(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue_sym(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace proxsplit::detail
