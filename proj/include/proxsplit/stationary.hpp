#pragma once

// Fixed points of each step map in engine coordinates, built from an oracle
// solution and its dual certificates, plus the distance in the metric each
// iteration is nonexpansive in. Used by the fixed-point consistency and
// Fejer monotonicity checks and for the dist_P trace column.

#include <cmath>

#include "proxsplit/detail/dense.hpp"
#include "proxsplit/oracles.hpp"
#include "proxsplit/problem.hpp"
#include "proxsplit/state.hpp"
#include "proxsplit/validate.hpp"

namespace proxsplit {

namespace detail {

inline Vec pddr_s_star(const ProblemSpec& p, double tau, const Vec& x, const Vec& ltu,
                       bool form_two) {
  Matrix q = materialize(p.h.quadratic_op(p.dim));
  Matrix m = -0.5 * tau * q;
  m.diagonal().array() += 1.0;
  EVec rhs;
  if (form_two) {
    rhs = to_eigen(x) + tau * to_eigen(ltu);
  } else {
    rhs = to_eigen(x) - tau * (q * to_eigen(x)) - tau * to_eigen(ltu);
  }
  return solve_lu(m, from_eigen(rhs), "pddr stationary state");
}

}  // namespace detail

// The state a validated run must leave unchanged, constructed analytically
// from the oracle point and its dual certificates.
inline IterState stationary_state(Algorithm alg, const ProblemSpec& p,
                                  const SolverConfig& cfg, const OracleSolution& o) {
  const Vec& x = o.x_star;
  auto dual = [&o](std::size_t m) -> const Vec& {
    if (m >= o.duals.size())
      throw ContractViolation("stationary_state: oracle lacks a dual certificate");
    return o.duals[m];
  };
  const std::size_t m_terms = p.terms.size();
  IterState z;
  switch (alg) {
    case Algorithm::FB:
    case Algorithm::PPA:
      z.primary = x;
      return z;
    case Algorithm::DR: {
      if (m_terms > 1) {  // consensus blocks s_m = x - (tau/w_m) u_m
        const double tau = *cfg.tau;
        std::vector<double> w(m_terms, 1.0 / static_cast<double>(m_terms));
        if (cfg.weights) w = *cfg.weights;
        std::vector<Vec> blocks(m_terms);
        for (std::size_t m = 0; m < m_terms; ++m)
          blocks[m] = axpy(-tau / w[m], dual(m), x);
        z.primary = concat(blocks);
        return z;
      }
      z.primary = axpy(-*cfg.tau, dual(0), x);
      return z;
    }
    case Algorithm::ADMM:
    case Algorithm::ADMM_ALT:
      z.primary = x;
      z.duals.push_back(*cfg.tau * dual(0));
      return z;
    case Algorithm::LIFTED_ADMM:
      z.primary = axpy(-*cfg.tau, dual(0), p.terms.at(0).L.apply(x));
      return z;
    case Algorithm::CP_I:
    case Algorithm::CP_II:
    case Algorithm::CV_I:
    case Algorithm::CV_II:
    case Algorithm::PMM:
    case Algorithm::PDFP:
    case Algorithm::LV: {
      z.primary = x;
      for (std::size_t m = 0; m < m_terms; ++m) z.duals.push_back(dual(m));
      return z;
    }
    case Algorithm::GCP: {
      z.primary = x;
      z.duals.push_back(dual(1));  // u, attached to the second (L) term
      z.duals.push_back(dual(0));  // v, attached to the first (K) term
      return z;
    }
    case Algorithm::PD3O: {
      const double tau = *cfg.tau;
      if (m_terms > 1) {  // compact parallel state: s~ = x - tau grad h(x)
        z.primary = axpy(-tau, grad(p.h, x), x);
        for (std::size_t m = 0; m < m_terms; ++m) z.duals.push_back(dual(m));
        return z;
      }
      Vec s = axpy(-tau, p.terms.at(0).L.adjoint(dual(0)), axpy(-tau, grad(p.h, x), x));
      z.primary = std::move(s);
      z.duals.push_back(dual(0));
      return z;
    }
    case Algorithm::DY: {
      const double tau = *cfg.tau;
      if (m_terms > 1) {  // consensus: s_m = x - tau grad h(x) - (tau/w_m) u_m
        std::vector<double> w(m_terms, 1.0 / static_cast<double>(m_terms));
        if (cfg.weights) w = *cfg.weights;
        Vec head = axpy(-tau, grad(p.h, x), x);
        std::vector<Vec> blocks(m_terms);
        for (std::size_t m = 0; m < m_terms; ++m)
          blocks[m] = axpy(-tau / w[m], dual(m), head);
        z.primary = concat(blocks);
        return z;
      }
      z.primary = axpy(-tau, dual(0) + grad(p.h, x), x);
      return z;
    }
    case Algorithm::PDDR_QUAD_I:
    case Algorithm::PDDR_QUAD_II: {
      Vec ltu = p.terms.at(0).L.adjoint(dual(0));
      z.primary = detail::pddr_s_star(p, *cfg.tau, x, ltu,
                                      alg == Algorithm::PDDR_QUAD_II);
      z.duals.push_back(dual(0));
      return z;
    }
    case Algorithm::EGCP:
      throw ContractViolation("stationary_state: construct egcp states from the dual KKT");
  }
  throw ContractViolation("stationary_state: unreachable");
}

// Squared distance between two states in the metric the algorithm is
// nonexpansive in.
inline double metric_dist_sq(Algorithm alg, const ProblemSpec& p, const SolverConfig& cfg,
                             const IterState& a, const IterState& b) {
  Vec dx = a.primary - b.primary;
  auto du = [&](std::size_t m) { return a.duals.at(m) - b.duals.at(m); };
  switch (alg) {
    case Algorithm::FB: {
      if (cfg.quadratic_mode) {
        // proximal-point view: P = (1/gamma) Id - Q
        Vec qd = p.h.quadratic_op(p.dim).apply(dx);
        return dot(dx, (1.0 / *cfg.gamma) * dx - qd);
      }
      return norm_sq(dx);
    }
    case Algorithm::PPA:
      return norm_sq(dx);
    case Algorithm::DR:
    case Algorithm::DY:
    case Algorithm::LIFTED_ADMM: {
      if (p.terms.size() > 1) {  // weighted consensus metric
        std::vector<double> w(p.terms.size(), 1.0 / static_cast<double>(p.terms.size()));
        if (cfg.weights) w = *cfg.weights;
        auto blocks = split(dx, std::vector<std::size_t>(p.terms.size(), p.dim));
        double s = 0.0;
        for (std::size_t m = 0; m < blocks.size(); ++m) s += w[m] * norm_sq(blocks[m]);
        return s;
      }
      return norm_sq(dx);
    }
    case Algorithm::ADMM:
    case Algorithm::ADMM_ALT: {
      Vec ds = dx - (a.duals.at(0) - b.duals.at(0));  // s = w - v~
      return norm_sq(ds);
    }
    case Algorithm::CP_I:
    case Algorithm::CP_II:
    case Algorithm::CV_I:
    case Algorithm::CV_II: {
      const LinOp& L = p.terms.at(0).L;
      Vec d0 = du(0);
      const double cross = dot(L.apply(dx), d0);
      const double sgn =
          (alg == Algorithm::CP_I || alg == Algorithm::CV_I) ? -1.0 : 1.0;
      return norm_sq(dx) / *cfg.tau + 2.0 * sgn * cross + norm_sq(d0) / *cfg.sigma;
    }
    case Algorithm::PMM:
    case Algorithm::LV: {
      const LinOp& L = p.terms.at(0).L;
      Vec d0 = du(0);
      Vec lt = L.adjoint(d0);
      return norm_sq(dx) / *cfg.tau + norm_sq(d0) / *cfg.sigma - *cfg.tau * norm_sq(lt);
    }
    case Algorithm::PDFP: {
      const LinOp& L = p.terms.at(0).L;
      Vec d0 = du(0);
      Vec lt = L.adjoint(d0);
      // affine prox of f: R v = prox(v) - prox(0)
      Vec rv = prox(p.f, *cfg.tau, lt).point - prox(p.f, *cfg.tau, Vec(lt.dim())).point;
      return norm_sq(dx) / *cfg.tau + norm_sq(d0) / *cfg.sigma -
             *cfg.tau * dot(d0, L.apply(rv));
    }
    case Algorithm::GCP:
    case Algorithm::EGCP: {
      const LinOp& K = p.terms.at(0).L;
      const LinOp& L = p.terms.at(1).L;
      Vec d0 = du(0);  // u
      Vec d1 = du(1);  // v
      return norm_sq(dx) / *cfg.tau - 2.0 * dot(L.apply(dx), d0) +
             norm_sq(d0) / *cfg.sigma + norm_sq(d1) / *cfg.eta -
             *cfg.tau * norm_sq(K.adjoint(d1));
    }
    case Algorithm::PD3O: {
      if (p.terms.size() > 1)
        throw ContractViolation("metric_dist_sq: product-space pd3o metric not provided");
      const LinOp& L = p.terms.at(0).L;
      Vec d0 = du(0);
      const double tau = *cfg.tau;
      return norm_sq(dx) + (tau / *cfg.sigma) * norm_sq(d0) -
             tau * tau * norm_sq(L.adjoint(d0));
    }
    case Algorithm::PDDR_QUAD_I:
    case Algorithm::PDDR_QUAD_II: {
      const LinOp& L = p.terms.at(0).L;
      Vec d0 = du(0);
      Vec qd = p.h.quadratic_op(p.dim).apply(dx);
      return dot(dx, (1.0 / *cfg.tau) * dx - 0.5 * qd) + norm_sq(d0) / *cfg.sigma -
             *cfg.tau * norm_sq(L.adjoint(d0));
    }
  }
  throw ContractViolation("metric_dist_sq: unreachable");
}

inline double metric_dist(Algorithm alg, const ProblemSpec& p, const SolverConfig& cfg,
                          const IterState& a, const IterState& b) {
  return std::sqrt(std::max(0.0, metric_dist_sq(alg, p, cfg, a, b)));
}

}  // namespace proxsplit
