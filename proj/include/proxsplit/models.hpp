#pragma once

// Desk-scale problem generators. Everything is deterministic in the seed;
// the regularization weight is absolute. Dimensions are capped so that the
// independent oracles stay affordable.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "proxsplit/errors.hpp"
#include "proxsplit/problem.hpp"

namespace proxsplit {

enum class ModelKind { Lasso, Tv1d, ConstrainedLS };

inline const char* model_name(ModelKind k) {
  switch (k) {
    case ModelKind::Lasso: return "lasso";
    case ModelKind::Tv1d: return "tv1d";
    case ModelKind::ConstrainedLS: return "cls";
  }
  return "?";
}

namespace detail {
inline Vec gaussian_vec(std::mt19937_64& rng, std::size_t n, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = scale * g(rng);
  return Vec::raw(std::move(v));
}
}  // namespace detail

// lasso:  (1/2)||A x - y||^2 + reg ||x||_1, housed as
//         f = 0, g_1 = reg |.|_1 with L_1 = Id, h quadratic with Q = A^T A.
// rows is the number of measurement rows of A.
inline ProblemSpec build_lasso(std::uint64_t seed, std::size_t n, std::size_t rows,
                               double reg) {
  if (n < 1 || n > 200 || rows < 1)
    throw ContractViolation("build_lasso: desk scale requires 1 <= n <= 200");
  if (!(reg > 0.0)) throw ContractViolation("build_lasso: reg must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> a(rows * n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  for (double& x : a) x = scale * g(rng);
  // planted sparse signal plus mild noise, so solutions have small support
  std::vector<double> xp(n, 0.0);
  const std::size_t nnz = std::max<std::size_t>(1, n / 8);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  for (std::size_t k = 0; k < nnz; ++k) {
    const std::size_t j = pick(rng);
    xp[j] = (g(rng) > 0 ? 1.0 : -1.0) * mag(rng);
  }
  LinOp A = LinOp::dense(rows, n, a, "A");
  Vec y = A.apply(Vec::raw(std::move(xp))) + detail::gaussian_vec(rng, rows, 0.05);

  // Q = A^T A, c = -A^T y, t = (1/2)||y||^2
  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < rows; ++r) s += a[r * n + i] * a[r * n + j];
      q[i * n + j] = s;
      q[j * n + i] = s;
    }
  LinOp Q = certified(LinOp::dense(n, n, std::move(q), "AtA"));
  Fun h = Fun::quadratic(Q, -A.adjoint(y), 0.5 * norm_sq(y));
  ProblemSpec p = make_problem(Fun::zero(), {Term{Fun::l1(reg), LinOp::identity(n)}},
                               h, n, "lasso");
  return p;
}

// Largest useful lasso weight: ||A^T y||_inf, read off the linear part of h.
inline double lasso_lambda_max(const ProblemSpec& p) {
  return inf_norm(p.h.quadratic_lin(p.dim));
}

// tv1d:  (1/2)||x - y||^2 + reg ||D x||_1 with D the forward differences,
// y a noisy piecewise-constant signal.
inline ProblemSpec build_tv1d(std::uint64_t seed, std::size_t n, double reg) {
  if (n < 2 || n > 200)
    throw ContractViolation("build_tv1d: desk scale requires 2 <= n <= 200");
  if (!(reg > 0.0)) throw ContractViolation("build_tv1d: reg must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> nseg(2, 4);
  std::uniform_real_distribution<double> level(-3.0, 3.0);
  const std::size_t segments = nseg(rng);
  std::vector<double> y(n);
  std::size_t at = 0;
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t end = (s + 1 == segments) ? n : at + n / segments;
    const double v = level(rng);
    for (; at < end && at < n; ++at) y[at] = v + 0.1 * g(rng);
  }
  Vec yy = Vec::raw(std::move(y));
  Fun h = Fun::quadratic(LinOp::identity(n), -yy, 0.5 * norm_sq(yy));
  LinOp D = certified(LinOp::diff1d(n));
  return make_problem(Fun::zero(), {Term{Fun::l1(reg), D}}, h, n, "tv1d");
}

// cls:  (1/2)||C x - d||^2 s.t. A x = b, housed as f = affine indicator,
// no composed terms, h quadratic. rows is the number of equality constraints.
inline ProblemSpec build_constrained_ls(std::uint64_t seed, std::size_t n,
                                        std::size_t rows) {
  if (n < 2 || n > 200 || rows < 1 || rows >= n)
    throw ContractViolation("build_constrained_ls: need 1 <= rows < n <= 200");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> cmat(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      cmat[i * n + j] = (i == j ? 1.0 : 0.0) + 0.3 * g(rng) / std::sqrt(static_cast<double>(n));
  LinOp C = LinOp::dense(n, n, cmat, "C");
  Vec d = detail::gaussian_vec(rng, n, 1.0);
  std::vector<double> amat(rows * n);
  for (double& x : amat) x = g(rng);
  LinOp A = LinOp::dense(rows, n, std::move(amat), "Aeq");
  Vec b = A.apply(detail::gaussian_vec(rng, n, 1.0));  // feasible by construction

  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < n; ++r) s += cmat[r * n + i] * cmat[r * n + j];
      q[i * n + j] = s;
      q[j * n + i] = s;
    }
  LinOp Q = certified(LinOp::dense(n, n, std::move(q), "CtC"));
  Fun h = Fun::quadratic(Q, -C.adjoint(d), 0.5 * norm_sq(d));
  return make_problem(Fun::affine_indicator(A, b), {}, h, n, "cls");
}

inline ProblemSpec build_model(ModelKind kind, std::uint64_t seed, std::size_t n,
                               std::size_t rows, double reg) {
  switch (kind) {
    case ModelKind::Lasso: return build_lasso(seed, n, rows, reg);
    case ModelKind::Tv1d: return build_tv1d(seed, n, reg);
    case ModelKind::ConstrainedLS: return build_constrained_ls(seed, n, rows);
  }
  throw ContractViolation("build_model: unknown kind");
}

}  // namespace proxsplit
