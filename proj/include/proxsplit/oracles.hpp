#pragma once

// Independent ground truth for the desk problems. The methods here share no
// code path with the splitting engines: support/sign enumeration with exact
// KKT verification for l1-regularized quadratics, a taut-string construction
// for 1-D total variation, and a direct KKT solve for equality-constrained
// least squares. Every result re-verifies its own first-order conditions
// before it is returned.

#include <cmath>
#include <string>
#include <vector>

#include "proxsplit/detail/dense.hpp"
#include "proxsplit/errors.hpp"
#include "proxsplit/problem.hpp"

namespace proxsplit {

struct OracleSolution {
  Vec x_star;
  std::vector<Vec> duals;  // per-term dual at L_m x*, or the KKT multiplier
  double objective = 0.0;
  std::string method;
  double certificate = 0.0;  // residual of the first-order conditions
};

namespace detail {

// minimize (1/2)<x,Qx> + <c,x> + t + lambda ||x||_1 by enumerating supports
// in increasing cardinality and sign patterns on each support; the first
// candidate passing the full KKT check is the global minimizer.
inline OracleSolution l1_quadratic_solve(const Matrix& q, const Vec& c, double t,
                                         double lambda) {
  const std::size_t n = c.dim();
  if (n > 20)
    throw OracleError("l1 quadratic oracle: support enumeration capped at n = 20");
  const double scale = std::max({1.0, q.cwiseAbs().maxCoeff(), inf_norm(c), lambda});
  const double tol = 1e-9 * scale;
  long long budget = 30'000'000;

  EVec cv = to_eigen(c);
  std::vector<int> support;
  std::vector<int> signs;

  auto kkt_check = [&](const EVec& x) -> double {
    EVec grad_q = q * x + cv;
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (x[static_cast<Eigen::Index>(j)] != 0.0) {
        worst = std::max(worst, std::abs(grad_q[j] + lambda * (x[j] > 0 ? 1.0 : -1.0)));
      } else {
        worst = std::max(worst, std::max(0.0, std::abs(grad_q[j]) - lambda));
      }
    }
    return worst;
  };

  // candidate solve for a fixed (support, sign) pattern
  auto try_pattern = [&](const std::vector<int>& sup,
                         const std::vector<int>& sgn) -> std::optional<OracleSolution> {
    const auto k = static_cast<Eigen::Index>(sup.size());
    EVec x = EVec::Zero(static_cast<Eigen::Index>(n));
    if (k > 0) {
      Matrix qs(k, k);
      EVec rhs(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        rhs[a] = -(cv[sup[a]] + lambda * sgn[a]);
        for (Eigen::Index b = 0; b < k; ++b) qs(a, b) = q(sup[a], sup[b]);
      }
      Eigen::LLT<Matrix> llt(qs);
      if (llt.info() != Eigen::Success) return std::nullopt;
      EVec xs = llt.solve(rhs);
      for (Eigen::Index a = 0; a < k; ++a) {
        if (!(xs[a] * sgn[a] > 0.0)) return std::nullopt;  // sign-inconsistent
        x[sup[a]] = xs[a];
      }
    }
    const double res = kkt_check(x);
    if (res > tol) return std::nullopt;
    OracleSolution sol;
    sol.x_star = from_eigen(x);
    EVec grad_q = q * x + cv;
    sol.duals.push_back(from_eigen((-grad_q).eval()));  // in lambda d||.||_1(x*)
    sol.objective = 0.5 * x.dot(q * x) + cv.dot(x) + t + lambda * x.cwiseAbs().sum();
    sol.method = "l1-quadratic support enumeration";
    sol.certificate = res;
    return sol;
  };

  // iterate subsets of each cardinality, then sign patterns
  std::vector<int> idx;
  for (std::size_t k = 0; k <= n; ++k) {
    idx.assign(k, 0);
    for (std::size_t i = 0; i < k; ++i) idx[i] = static_cast<int>(i);
    while (true) {
      const auto patterns = 1LL << k;
      for (long long bits = 0; bits < patterns; ++bits) {
        if (--budget < 0) throw OracleError("l1 quadratic oracle: enumeration budget exhausted");
        std::vector<int> sgn(k);
        for (std::size_t i = 0; i < k; ++i) sgn[i] = (bits >> i) & 1 ? 1 : -1;
        if (auto sol = try_pattern(idx, sgn)) return *sol;
      }
      // next combination of size k
      if (k == 0) break;
      int i = static_cast<int>(k) - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] ==
                           static_cast<int>(n - k + static_cast<std::size_t>(i)))
        --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (auto j = static_cast<std::size_t>(i) + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  throw OracleError("l1 quadratic oracle: no KKT point found");
}

// Exact 1-D total variation denoising, taut string through the tube of
// width lambda around the running sums, pinned at both ends. Quadratic
// worst case in n, which is fine at desk scale.
inline Vec taut_string_tv(const Vec& y, double lambda) {
  const std::size_t n = y.dim();
  if (n == 0) throw OracleError("taut string: empty signal");
  if (lambda == 0.0) return y;
  std::vector<double> r(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) r[i + 1] = r[i] + y[i];
  std::vector<double> up(n + 1), lo(n + 1);
  up[0] = lo[0] = 0.0;
  up[n] = lo[n] = r[n];
  for (std::size_t i = 1; i < n; ++i) {
    up[i] = r[i] + lambda;
    lo[i] = r[i] - lambda;
  }
  std::vector<double> s(n + 1, 0.0);
  std::size_t i0 = 0;
  double v0 = 0.0;
  while (i0 < n) {
    double a_up = std::numeric_limits<double>::infinity();
    double a_lo = -std::numeric_limits<double>::infinity();
    std::size_t k_up = i0, k_lo = i0;
    for (std::size_t j = i0 + 1; j <= n; ++j) {
      const double span = static_cast<double>(j - i0);
      const double su = (up[j] - v0) / span;
      const double sl = (lo[j] - v0) / span;
      if (sl > a_up) {
        // straight run impossible: the string wraps the upper touch point
        for (std::size_t i = i0 + 1; i <= k_up; ++i)
          s[i] = v0 + a_up * static_cast<double>(i - i0);
        v0 = s[k_up];
        i0 = k_up;
        break;
      }
      if (su < a_lo) {
        for (std::size_t i = i0 + 1; i <= k_lo; ++i)
          s[i] = v0 + a_lo * static_cast<double>(i - i0);
        v0 = s[k_lo];
        i0 = k_lo;
        break;
      }
      if (su < a_up) {
        a_up = su;
        k_up = j;
      }
      if (sl > a_lo) {
        a_lo = sl;
        k_lo = j;
      }
      if (j == n) {
        // end pinned: the final slope is feasible, finish the string
        const double a_end = (r[n] - v0) / static_cast<double>(n - i0);
        for (std::size_t i = i0 + 1; i <= n; ++i)
          s[i] = v0 + a_end * static_cast<double>(i - i0);
        i0 = n;
        break;
      }
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = s[i + 1] - s[i];
  return Vec::raw(std::move(x));
}

}  // namespace detail

// Ground truth for the recognized model structures. Throws OracleError when
// the problem shape has no independent solver or when self-verification of
// the first-order conditions fails.
inline OracleSolution oracle_solve(const ProblemSpec& p) {
  // (a) l1-regularized quadratic: f = 0, one l1 term with L = Id, h quadratic
  if (p.f.kind() == FunKind::Zero && p.terms.size() == 1 &&
      p.terms[0].g.kind() == FunKind::L1 && p.terms[0].L.kind() == OpKind::Identity &&
      p.h.kind() == FunKind::Quadratic) {
    detail::Matrix q = detail::materialize(p.h.quadratic_op(p.dim));
    OracleSolution sol = detail::l1_quadratic_solve(q, p.h.quadratic_lin(p.dim),
                                                    p.h.constant_part(),
                                                    p.terms[0].g.weight());
    if (sol.certificate > 1e-9)
      throw OracleError("oracle_solve: certificate above 1e-9");
    return sol;
  }

  // (b) 1-D total variation: f = 0, one l1 term with L = diff1d, h = (1/2)||x-y||^2
  if (p.f.kind() == FunKind::Zero && p.terms.size() == 1 &&
      p.terms[0].g.kind() == FunKind::L1 && p.terms[0].L.kind() == OpKind::Diff1D &&
      p.h.kind() == FunKind::Quadratic &&
      p.h.quadratic_op(p.dim).kind() == OpKind::Identity) {
    const double lambda = p.terms[0].g.weight();
    Vec y = -p.h.quadratic_lin(p.dim);
    Vec x = detail::taut_string_tv(y, lambda);
    // duals from stationarity: x - y + D^T w = 0 with w = s - r interior
    const std::size_t n = y.dim();
    std::vector<double> w(n - 1, 0.0);
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      acc += x[j] - y[j];
      w[j] = acc;  // telescoping solve of D^T w = y - x ... see check below
    }
    // verify: D^T w must equal y - x, w in [-lambda, lambda], tight where x jumps
    Vec wv = Vec::raw(std::move(w));
    const LinOp& D = p.terms[0].L;
    double res = norm(D.adjoint(wv) - (y - x)) / (1.0 + norm(y));
    for (std::size_t j = 0; j + 1 < n; ++j) {
      res = std::max(res, std::max(0.0, std::abs(wv[j]) - lambda));
      const double jump = x[j + 1] - x[j];
      if (std::abs(jump) > 1e-8)
        res = std::max(res, std::abs(wv[j] - lambda * (jump > 0 ? 1.0 : -1.0)));
    }
    if (res > 1e-9) throw OracleError("tv oracle: KKT residual " + std::to_string(res));
    OracleSolution sol;
    sol.x_star = x;
    sol.duals.push_back(wv);  // dual of the l1 term at Dx*
    sol.objective = objective(p, x);
    sol.method = "taut string";
    sol.certificate = res;
    return sol;
  }

  // (c) equality-constrained least squares: f = affine indicator, no terms
  if (p.f.kind() == FunKind::AffineIndicator && p.terms.empty() &&
      p.h.kind() == FunKind::Quadratic) {
    detail::Matrix q = detail::materialize(p.h.quadratic_op(p.dim));
    detail::Matrix a = detail::materialize(p.f.op());
    const Vec c = p.h.quadratic_lin(p.dim);
    const Vec& b = p.f.linear_part();
    const auto n = static_cast<Eigen::Index>(p.dim);
    const auto m = a.rows();
    detail::Matrix kkt(n + m, n + m);
    kkt.setZero();
    kkt.topLeftCorner(n, n) = q;
    kkt.topRightCorner(n, m) = a.transpose();
    kkt.bottomLeftCorner(m, n) = a;
    detail::EVec rhs(n + m);
    rhs.head(n) = -detail::to_eigen(c);
    rhs.tail(m) = detail::to_eigen(b);
    Vec sol_vec = detail::solve_lu(kkt, Vec::raw(std::vector<double>(
                                            rhs.data(), rhs.data() + rhs.size())),
                                   "cls oracle");
    detail::EVec all = detail::to_eigen(sol_vec);
    Vec x = detail::from_eigen(all.head(n).eval());
    Vec mu = detail::from_eigen(all.tail(m).eval());
    double res = norm(detail::from_eigen(
                     (q * all.head(n) + detail::to_eigen(c) + a.transpose() * all.tail(m))
                         .eval())) +
                 norm(detail::from_eigen((a * all.head(n)).eval()) - b);
    res /= 1.0 + norm(x);
    if (res > 1e-9) throw OracleError("cls oracle: KKT residual " + std::to_string(res));
    OracleSolution sol;
    sol.x_star = x;
    sol.duals.push_back(mu);
    sol.objective = objective(p, x);
    sol.method = "kkt solve";
    sol.certificate = res;
    return sol;
  }

  throw OracleError("oracle_solve: no independent oracle for this problem structure");
}

}  // namespace proxsplit
