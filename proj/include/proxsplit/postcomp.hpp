#pragma once

#include "proxsplit/detail/dense.hpp"
#include "proxsplit/errors.hpp"
#include "proxsplit/fun.hpp"
#include "proxsplit/linop.hpp"

namespace proxsplit {

struct Postcomposition {
  Vec r_out;      // L x_witness, unique even when the argmin is not
  Vec x_witness;  // minimizer of tau f(x) + (1/2)||L x - r||^2
};

// prox of the infimal postcomposition of f by L, restricted to function
// kinds whose subproblem is one linear solve. Rank-deficient systems are
// regularized with ridge 1e-12, which selects (up to that ridge) the
// minimum-norm witness.
inline Postcomposition prox_postcomposition(const Fun& f, const LinOp& L, double tau,
                                            const Vec& r) {
  if (!(tau > 0.0)) throw ContractViolation("prox_postcomposition: tau must be positive");
  if (r.dim() != L.out_dim())
    throw DimensionError("prox_postcomposition", L.out_dim(), r.dim());
  constexpr double kRidge = 1e-12;
  const std::size_t n = L.in_dim();
  detail::Matrix lmat = detail::materialize(L);
  detail::Matrix ltl = lmat.transpose() * lmat;

  switch (f.kind()) {
    case FunKind::Zero:
    case FunKind::LinearTerm:
    case FunKind::SquaredL2:
    case FunKind::Quadratic: {
      // (tau Q + L^T L) x = L^T r - tau c
      detail::Matrix m = ltl;
      if (f.kind() == FunKind::Quadratic)
        m += tau * detail::materialize(f.op());
      else if (f.kind() == FunKind::SquaredL2)
        m.diagonal().array() += tau * f.weight();
      detail::EVec rhs = lmat.transpose() * detail::to_eigen(r);
      if (f.kind() == FunKind::LinearTerm || f.kind() == FunKind::Quadratic)
        rhs -= tau * detail::to_eigen(f.linear_part());
      Eigen::LDLT<detail::Matrix> ldlt(m);
      const auto piv = ldlt.vectorD();
      const double piv_max = std::max(piv.maxCoeff(), 1e-300);
      detail::EVec x;
      if (ldlt.info() == Eigen::Success && piv.minCoeff() > 1e-12 * piv_max) {
        x = ldlt.solve(rhs);
      } else {
        detail::Matrix mr = m;
        mr.diagonal().array() += kRidge * std::max(1.0, piv_max);
        Eigen::LLT<detail::Matrix> llt2(mr);
        if (llt2.info() != Eigen::Success)
          throw SingularSystemError("prox_postcomposition: system not positive semidefinite");
        x = llt2.solve(rhs);
      }
      Vec xw = detail::from_eigen(x);
      return Postcomposition{L.apply(xw), xw};
    }
    case FunKind::AffineIndicator: {
      // min (1/2)||Lx - r||^2 s.t. A x = y via the KKT system.
      detail::Matrix amat = detail::materialize(f.op());
      const auto p = amat.rows();
      detail::Matrix kkt(n + p, n + p);
      kkt.setZero();
      kkt.topLeftCorner(n, n) = ltl;
      kkt.topRightCorner(n, p) = amat.transpose();
      kkt.bottomLeftCorner(p, n) = amat;
      detail::EVec rhs(n + p);
      rhs.head(n) = lmat.transpose() * detail::to_eigen(r);
      rhs.tail(p) = detail::to_eigen(f.linear_part());
      Eigen::FullPivLU<detail::Matrix> lu(kkt);
      if (!lu.isInvertible()) {
        kkt.topLeftCorner(n, n).diagonal().array() += kRidge;
        lu.compute(kkt);
        if (!lu.isInvertible())
          throw SingularSystemError("prox_postcomposition: degenerate KKT system");
      }
      detail::EVec sol = lu.solve(rhs);
      Vec xw = detail::from_eigen(sol.head(n));
      return Postcomposition{L.apply(xw), xw};
    }
    default:
      throw UnsupportedPostcomposition(
          "prox_postcomposition: function kind does not reduce to a linear solve");
  }
}

}  // namespace proxsplit
