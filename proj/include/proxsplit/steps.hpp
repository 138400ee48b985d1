#pragma once

// One step map per splitting algorithm. Each factory closes over the
// problem pieces and returns a pure map: state in, half-step and relaxed
// full step out. Relaxation is the uniform template
//   z^{(i+1)} = z^{(i)} + rho (z^{(i+1/2)} - z^{(i)}),
// except where an algorithm applies rho inside its own update (the ADMM
// extrapolation and its alternate relaxation), in which case the map
// constructs the next state itself.

#include <optional>
#include <utility>

#include "proxsplit/fun.hpp"
#include "proxsplit/linop.hpp"
#include "proxsplit/postcomp.hpp"
#include "proxsplit/state.hpp"

namespace proxsplit {

enum class PdForm { I, II };

namespace detail {
inline Vec px(const Fun& f, double t, const Vec& w) { return prox(f, t, w).point; }
inline Vec pcj(const Fun& g, double s, const Vec& w) { return prox_conjugate(g, s, w).point; }
}  // namespace detail

// Forward-backward: x^{+1/2} = prox_{gamma f}(x - gamma grad h(x)).
// With a diagonal preconditioner p the update is the resolvent of P^{-1} df
// at x - P^{-1} grad h(x) in the metric P = diag(p). The proximal point
// iteration is the h = 0 case.
inline StepMap make_fb_step(Fun f, Fun h, double gamma,
                            std::optional<Vec> diag_precond = std::nullopt) {
  return [f, h, gamma, diag_precond](const IterState& z, double rho) {
    const Vec& x = z.primary;
    Vec g = grad(h, x);
    Vec xh;
    if (diag_precond) {
      const Vec& p = *diag_precond;
      std::vector<double> v(x.dim());
      for (std::size_t i = 0; i < x.dim(); ++i) v[i] = x[i] - g[i] / p[i];
      xh = prox_in_metric(f, p, Vec::raw(std::move(v)));
    } else {
      xh = detail::px(f, gamma, axpy(-gamma, g, x));
    }
    StepResult out;
    out.half.primary = std::move(xh);
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// Douglas-Rachford on f + g (+ <.,c> drift folded into the f-prox):
//   x^{+1/2} = prox_{tau f}(s - tau c)
//   s^{+1/2} = s + prox_{tau g}(2 x^{+1/2} - s) - x^{+1/2}.
// The implicit dual estimate (2x^{+1/2} - s - prox_{tau g}(2x^{+1/2}-s))/tau
// is reported for logging; it converges to a dual solution.
inline StepMap make_dr_step(Fun f, Fun g, double tau,
                            std::optional<Vec> drift = std::nullopt) {
  return [f, g, tau, drift](const IterState& z, double rho) {
    const Vec& s = z.primary;
    Vec xh = detail::px(f, tau, drift ? axpy(-tau, *drift, s) : s);
    Vec refl = 2.0 * xh - s;
    Vec w = detail::px(g, tau, refl);
    StepResult out;
    out.half.primary = s + (w - xh);
    out.half.aux.emplace("x_half", xh);
    out.half.aux.emplace("u_half", (1.0 / tau) * (refl - w));
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// ADMM on f + g, kept in the (w, v~) variables; matches Douglas-Rachford
// through s = w - v~. The trailing extrapolation of v~ carries the
// relaxation, so this map builds its own next state.
inline StepMap make_admm_step(Fun f, Fun g, double tau) {
  return [f, g, tau](const IterState& z, double rho) {
    const Vec& w = z.primary;
    const Vec& v = z.duals.at(0);
    Vec xh = detail::px(f, tau, w - v);
    Vec vh = v + (xh - w);
    Vec wn = detail::px(g, tau, xh + vh);
    Vec vn = axpy(rho - 1.0, xh - wn, vh);
    StepResult out;
    out.half.primary = wn;
    out.half.duals.push_back(vh);
    out.half.aux.emplace("x_half", std::move(xh));
    out.next.primary = std::move(wn);
    out.next.duals.push_back(std::move(vn));
    return out;
  };
}

// Alternate ADMM relaxation: rho applied inside the v~ update, admissible
// for rho in (0, (sqrt(5)+1)/2).
inline StepMap make_admm_alt_step(Fun f, Fun g, double tau) {
  return [f, g, tau](const IterState& z, double rho) {
    const Vec& w = z.primary;
    const Vec& v = z.duals.at(0);
    Vec xh = detail::px(f, tau, w - v);
    Vec vn = axpy(rho, xh - w, v);
    Vec wn = detail::px(g, tau, vn + xh);
    StepResult out;
    out.next.primary = wn;
    out.next.duals.push_back(vn);
    out.half = out.next;
    out.half.aux.emplace("x_half", std::move(xh));
    return out;
  };
}

// Douglas-Rachford with both functions behind infimal postcompositions:
// min f(x) + g(y) s.t. L x + K y = c, iterating on s in the constraint
// space. Subproblems are regularized least squares (see prox_postcomposition).
inline StepMap make_lifted_admm_step(Fun f, LinOp L, Fun g, LinOp K, Vec c, double tau) {
  return [f, L, g, K, c, tau](const IterState& z, double rho) {
    const Vec& s = z.primary;
    Postcomposition pf = prox_postcomposition(f, L, tau, s);
    Vec target = (c - 2.0 * pf.r_out) + s;
    Postcomposition pg = prox_postcomposition(g, K, tau, target);
    Vec residual = (pf.r_out + pg.r_out) - c;
    StepResult out;
    out.half.primary = s - residual;
    out.half.aux.emplace("x_half", pf.x_witness);
    out.half.aux.emplace("y_half", pg.x_witness);
    out.half.aux.emplace("r_half", pf.r_out);
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// Chambolle-Pock on f + g(L.). Form I proxes the primal first; form II
// mirrors the order.
inline StepMap make_cp_step(Fun f, Fun g, LinOp L, double tau, double sigma, PdForm form) {
  return [f, g, L, tau, sigma, form](const IterState& z, double rho) {
    const Vec& x = z.primary;
    const Vec& u = z.duals.at(0);
    StepResult out;
    if (form == PdForm::I) {
      Vec xh = detail::px(f, tau, axpy(-tau, L.adjoint(u), x));
      Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(2.0 * xh - x), u));
      out.half.primary = std::move(xh);
      out.half.duals.push_back(std::move(uh));
    } else {
      Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(x), u));
      Vec xh = detail::px(f, tau, axpy(-tau, L.adjoint(2.0 * uh - u), x));
      out.half.primary = std::move(xh);
      out.half.duals.push_back(std::move(uh));
    }
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// Proximal method of multipliers for g(L.) + <.,c>; the two updates are
// independent (here executed sequentially for determinism).
inline StepMap make_pmm_step(Fun g, LinOp L, Vec c, double tau, double sigma) {
  return [g, L, c, tau, sigma](const IterState& z, double rho) {
    const Vec& x = z.primary;
    const Vec& u = z.duals.at(0);
    Vec a = L.adjoint(u) + c;
    Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(axpy(-2.0 * tau, a, x)), u));
    StepResult out;
    out.half.primary = axpy(-tau, a, x);
    out.half.duals.push_back(std::move(uh));
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// Loris-Verhoeven on g(L.) + h:
//   u^{+1/2} = prox_{sigma g*}(u + sigma L(x - tau grad h(x) - tau L* u))
//   x^{+1}   = x - rho tau (grad h(x) + L* u^{+1/2}).
// The buffered variant carries l = L* u so that each iteration calls
// grad h and L* once.
inline StepMap make_lv_step(Fun g, LinOp L, Fun h, double tau, double sigma,
                            bool buffered = false) {
  if (buffered) {
    return [g, L, h, tau, sigma](const IterState& z, double rho) {
      const Vec& x = z.primary;
      const Vec& u = z.duals.at(0);
      const Vec& l = aux_block(z, "l");
      Vec b = grad(h, x);
      Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(axpy(-tau, b + l, x)), u));
      Vec lh = L.adjoint(uh);
      StepResult out;
      out.half.primary = axpy(-tau, b + lh, x);
      out.half.duals.push_back(std::move(uh));
      out.half.aux.emplace("l", std::move(lh));
      out.next = relax_state(z, out.half, rho);
      return out;
    };
  }
  return [g, L, h, tau, sigma](const IterState& z, double rho) {
    const Vec& x = z.primary;
    const Vec& u = z.duals.at(0);
    Vec b = grad(h, x);
    Vec inner = axpy(-tau, L.adjoint(u), axpy(-tau, b, x));
    Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(inner), u));
    StepResult out;
    out.half.primary = axpy(-tau, L.adjoint(uh), axpy(-tau, b, x));
    out.half.duals.push_back(std::move(uh));
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// Primal-dual fixed point iteration on f + g(L.) + h; two f-proxes per
// iteration by construction.
inline StepMap make_pdfp_step(Fun f, Fun g, LinOp L, Fun h, double tau, double sigma) {
  return [f, g, L, h, tau, sigma](const IterState& z, double rho) {
    const Vec& x = z.primary;
    const Vec& u = z.duals.at(0);
    Vec base = axpy(-tau, grad(h, x), x);
    Vec xt = detail::px(f, tau, axpy(-tau, L.adjoint(u), base));
    Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(xt), u));
    Vec xh = detail::px(f, tau, axpy(-tau, L.adjoint(uh), base));
    StepResult out;
    out.half.primary = std::move(xh);
    out.half.duals.push_back(std::move(uh));
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// Generalized Chambolle-Pock on f(K.) + g(L.) + <.,c> with duals (u, v).
// The efficient form carries the scaled primal x~ = x/tau and the buffers
// b = K* v and lu = L* u, one call to each of K, K*, L, L* per iteration.
inline StepMap make_gcp_step(Fun f, LinOp K, Fun g, LinOp L, Vec c, double tau,
                             double sigma, double eta, bool efficient = false) {
  if (efficient) {
    return [f, K, g, L, c, tau, sigma, eta](const IterState& z, double rho) {
      const Vec& xt = z.primary;
      const Vec& u = z.duals.at(0);
      const Vec& v = z.duals.at(1);
      const Vec& b = aux_block(z, "b");
      const Vec& lu = aux_block(z, "lu");
      Vec l = (lu + b) + c;
      Vec vh = detail::pcj(f, eta, axpy(eta * tau, K.apply(xt - l), v));
      Vec kvh = K.adjoint(vh);
      Vec lh = l + (kvh - b);
      Vec uh = detail::pcj(g, sigma, axpy(sigma * tau, L.apply(axpy(-2.0, lh, xt)), u));
      StepResult out;
      out.half.primary = xt - lh;
      out.half.duals.push_back(uh);
      out.half.duals.push_back(std::move(vh));
      out.half.aux.emplace("b", std::move(kvh));
      out.half.aux.emplace("lu", L.adjoint(uh));
      out.half.aux.emplace("x_half", tau * (xt - lh));
      out.next = relax_state(z, out.half, rho);
      return out;
    };
  }
  return [f, K, g, L, c, tau, sigma, eta](const IterState& z, double rho) {
    const Vec& x = z.primary;
    const Vec& u = z.duals.at(0);
    const Vec& v = z.duals.at(1);
    Vec lu = L.adjoint(u);
    Vec r0 = (lu + K.adjoint(v)) + c;
    Vec vh = detail::pcj(f, eta, axpy(eta, K.apply(axpy(-tau, r0, x)), v));
    Vec xh = axpy(-tau, (lu + K.adjoint(vh)) + c, x);
    Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(2.0 * xh - x), u));
    StepResult out;
    out.half.primary = std::move(xh);
    out.half.duals.push_back(std::move(uh));
    out.half.duals.push_back(std::move(vh));
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// Condat-Vu on f + g(L.) + h, forms I and II.
inline StepMap make_cv_step(Fun f, Fun g, LinOp L, Fun h, double tau, double sigma,
                            PdForm form) {
  return [f, g, L, h, tau, sigma, form](const IterState& z, double rho) {
    const Vec& x = z.primary;
    const Vec& u = z.duals.at(0);
    Vec gh = grad(h, x);
    StepResult out;
    if (form == PdForm::I) {
      Vec xh = detail::px(f, tau, axpy(-tau, L.adjoint(u), axpy(-tau, gh, x)));
      Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(2.0 * xh - x), u));
      out.half.primary = std::move(xh);
      out.half.duals.push_back(std::move(uh));
    } else {
      Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(x), u));
      Vec xh = detail::px(
          f, tau, axpy(-tau, L.adjoint(2.0 * uh - u), axpy(-tau, gh, x)));
      out.half.primary = std::move(xh);
      out.half.duals.push_back(std::move(uh));
    }
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// Extended generalized Chambolle-Pock: the v-prox takes a forward step on
// the dual quadratic (1/2)<v,Qv> + <v,t> of the saddle problem.
inline StepMap make_egcp_step(Fun f, LinOp K, Fun g, LinOp L, Vec c, LinOp Qdual,
                              Vec t, double tau, double sigma, double eta) {
  return [f, K, g, L, c, Qdual, t, tau, sigma, eta](const IterState& z, double rho) {
    const Vec& x = z.primary;
    const Vec& u = z.duals.at(0);
    const Vec& v = z.duals.at(1);
    Vec lu = L.adjoint(u);
    Vec r0 = (lu + K.adjoint(v)) + c;
    Vec varg = axpy(eta, K.apply(axpy(-tau, r0, x)), v) - eta * (Qdual.apply(v) + t);
    Vec vh = detail::pcj(f, eta, varg);
    Vec xh = axpy(-tau, (lu + K.adjoint(vh)) + c, x);
    Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(2.0 * xh - x), u));
    StepResult out;
    out.half.primary = std::move(xh);
    out.half.duals.push_back(std::move(uh));
    out.half.duals.push_back(std::move(vh));
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// PD3O on f + g(L.) + h, s-driven. The compact form carries s~ = s + tau L* u
// and the buffer lu = L* u, one call to grad h and L* per iteration.
inline StepMap make_pd3o_step(Fun f, Fun g, LinOp L, Fun h, double tau, double sigma,
                              bool compact = false) {
  if (compact) {
    return [f, g, L, h, tau, sigma](const IterState& z, double rho) {
      const Vec& st = z.primary;
      const Vec& u = z.duals.at(0);
      const Vec& lu = aux_block(z, "lu");
      Vec xh = detail::px(f, tau, axpy(-tau, lu, st));
      Vec a = axpy(-tau, grad(h, xh), xh) - st;
      Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(xh + a), u));
      StepResult out;
      out.half.primary = st + a;
      out.half.duals.push_back(uh);
      out.half.aux.emplace("lu", L.adjoint(uh));
      out.half.aux.emplace("x_half", std::move(xh));
      out.next = relax_state(z, out.half, rho);
      return out;
    };
  }
  return [f, g, L, h, tau, sigma](const IterState& z, double rho) {
    const Vec& s = z.primary;
    const Vec& u = z.duals.at(0);
    Vec xh = detail::px(f, tau, s);
    Vec gh = grad(h, xh);
    Vec head = axpy(-tau, gh, 2.0 * xh - s);
    Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(axpy(-tau, L.adjoint(u), head)), u));
    StepResult out;
    out.half.primary = axpy(-tau, L.adjoint(uh), axpy(-tau, gh, xh));
    out.half.duals.push_back(std::move(uh));
    out.half.aux.emplace("x_half", std::move(xh));
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// Davis-Yin on f + g + h, s-driven.
inline StepMap make_dy_step(Fun f, Fun g, Fun h, double tau) {
  return [f, g, h, tau](const IterState& z, double rho) {
    const Vec& s = z.primary;
    Vec xh = detail::px(f, tau, s);
    Vec w = detail::px(g, tau, axpy(-tau, grad(h, xh), 2.0 * xh - s));
    StepResult out;
    out.half.primary = s + (w - xh);
    out.half.aux.emplace("x_half", std::move(xh));
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// Primal-dual Douglas-Rachford for quadratic h = (1/2)<x,Qx> + <c,x>:
// only half of Q enters each resolvent, at the price of exactly two Q
// applications per iteration.
inline StepMap make_pddr_quad_step(Fun f, Fun g, LinOp L, LinOp Q, Vec c, double tau,
                                   double sigma, PdForm form) {
  return [f, g, L, Q, c, tau, sigma, form](const IterState& z, double rho) {
    const Vec& s = z.primary;
    const Vec& u = z.duals.at(0);
    const double ht = 0.5 * tau;
    StepResult out;
    if (form == PdForm::I) {
      Vec qs = Q.apply(s);
      Vec xh = detail::px(f, tau, axpy(-tau, c, axpy(-ht, qs, s)));
      Vec d = 2.0 * xh - s;
      Vec qd = Q.apply(d);
      Vec inner = axpy(-tau, L.adjoint(u), axpy(-ht, qd, d));
      Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(inner), u));
      out.half.primary = axpy(-tau, L.adjoint(uh), axpy(-ht, qd, xh));
      out.half.duals.push_back(std::move(uh));
      out.half.aux.emplace("x_half", std::move(xh));
    } else {
      Vec qs = Q.apply(s);
      Vec head = axpy(-ht, qs, s);
      Vec inner = axpy(-tau, L.adjoint(u), head);
      Vec uh = detail::pcj(g, sigma, axpy(sigma, L.apply(inner), u));
      Vec yh = axpy(-tau, L.adjoint(uh), head);
      Vec d = 2.0 * yh - s;
      Vec qd = Q.apply(d);
      Vec xh = detail::px(f, tau, axpy(-tau, c, axpy(-ht, qd, d)));
      out.half.primary = s + (xh - yh);
      out.half.duals.push_back(std::move(uh));
      out.half.aux.emplace("x_half", std::move(xh));
      out.half.aux.emplace("y_half", std::move(yh));
    }
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

}  // namespace proxsplit
