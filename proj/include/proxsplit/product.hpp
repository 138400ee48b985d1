#pragma once
#include <atomic>
#include <algorithm>

// Product-space machinery: the two liftings that turn a sum of M composed
// terms into a two-operator problem, and the explicit parallel iterations
// for the Douglas-Rachford, Davis-Yin, Chambolle-Pock, Loris-Verhoeven,
// Condat-Vu and PD3O families. Per-block prox evaluations are independent
// and may run on a small thread pool; cross-block reductions are computed
// in a value-sorted order, so results are bit-identical under any
// permutation of the blocks.

#include <thread>
#include <utility>
#include <vector>

#include "proxsplit/fun.hpp"
#include "proxsplit/linop.hpp"
#include "proxsplit/problem.hpp"
#include "proxsplit/state.hpp"
#include "proxsplit/steps.hpp"

namespace proxsplit {

enum class LiftMode { Consensus, Stacked };
enum class ParallelFamily { DR_I, DR_II, DY, CP_I, CP_II, LV, CV_I, CV_II, PD3O };

namespace detail {

inline void check_weights(const std::vector<double>& w, bool sum_to_one) {
  for (double wm : w)
    if (!(wm > 0.0)) throw ContractViolation("lift: weights must be strictly positive");
  if (sum_to_one) {
    double s = 0.0;
    for (double wm : w) s += wm;
    if (std::abs(s - 1.0) > 1e-12)
      throw ContractViolation("lift: consensus weights must sum to 1");
  }
}

// run fn(m) for m = 0..count-1 on up to `threads` workers; each index writes
// only its own slot, so the combination order is fixed by the caller.
inline void for_each_block(std::size_t count, int threads,
                           const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t m = 0; m < count; ++m) fn(m);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&next, count, &fn] {
      for (std::size_t m = next.fetch_add(1); m < count; m = next.fetch_add(1)) fn(m);
    });
  for (auto& t : pool) t.join();
}

inline void require_parallel_safe(const std::vector<Fun>& gs, int threads) {
  if (threads <= 1) return;
  for (const Fun& g : gs)
    if (!g.thread_safe())
      throw ContractViolation(
          "parallel blocks: custom prox not declared thread-safe; refusing threads > 1");
}

}  // namespace detail

// A problem rewritten over a product space, exposing lifted functions and
// operator whose prox/apply are the block formulas of the chosen technique.
struct LiftedProblem {
  LiftMode mode;
  std::vector<double> weights;
  ProblemSpec base;
  Fun f;        // consensus: averaging-prox over X^M; stacked: base f
  Fun g;        // separable blocks, metric-aware
  LinOp L;      // stacked: weighted-adjoint stack; consensus: identity on X^M
  Fun h;        // consensus: broadcast of base h; stacked: base h
  std::size_t dim = 0;  // primal dimension of the lifted space
};

inline LiftedProblem lift(const ProblemSpec& base, LiftMode mode,
                          std::vector<double> weights) {
  const std::size_t m_count = base.terms.size();
  if (m_count == 0) throw ContractViolation("lift: no composed terms to lift");
  if (weights.size() != m_count)
    throw ContractViolation("lift: one weight per term required");

  LiftedProblem lp;
  lp.mode = mode;
  lp.weights = weights;
  lp.base = base;

  if (mode == LiftMode::Consensus) {
    detail::check_weights(weights, /*sum_to_one=*/true);
    for (const Term& t : base.terms)
      if (t.L.kind() != OpKind::Identity)
        throw ContractViolation("lift: consensus mode requires identity operators");
    const std::size_t n = base.dim;
    const std::size_t nd = n * m_count;
    std::vector<std::size_t> dims(m_count, n);

    Fun base_f = base.f;
    auto f_prox = [base_f, weights, dims, n, m_count](double gamma, const Vec& x) {
      auto blocks = split(x, dims);
      Vec avg = weighted_sum_ordered(blocks, weights);
      Vec p = prox(base_f, gamma, avg).point;
      std::vector<Vec> out(m_count, p);
      return concat(out);
    };
    auto f_value = [base_f, weights, dims](const Vec& x) {
      auto blocks = split(x, dims);
      return try_value(base_f, weighted_sum_ordered(blocks, weights)).value_or(0.0);
    };
    lp.f = Fun::custom(f_prox, nd, f_value, nullptr, base_f.thread_safe(),
                       "consensus(f)");

    std::vector<Fun> gs;
    for (const Term& t : base.terms) gs.push_back(t.g);
    auto g_prox = [gs, weights, dims, m_count](double gamma, const Vec& x) {
      auto blocks = split(x, dims);
      std::vector<Vec> out(m_count);
      for (std::size_t m = 0; m < m_count; ++m)
        out[m] = prox(gs[m], gamma / weights[m], blocks[m]).point;
      return concat(out);
    };
    auto g_value = [gs, dims, m_count](const Vec& x) {
      auto blocks = split(x, dims);
      double s = 0.0;
      for (std::size_t m = 0; m < m_count; ++m)
        s += try_value(gs[m], blocks[m]).value_or(0.0);
      return s;
    };
    bool safe = true;
    for (const Fun& g : gs) safe = safe && g.thread_safe();
    lp.g = Fun::custom(g_prox, nd, g_value, nullptr, safe, "consensus(g)");

    Fun base_h = base.h;
    auto h_grad = [base_h, dims, m_count](const Vec& x) {
      auto blocks = split(x, dims);
      std::vector<Vec> out(m_count);
      for (std::size_t m = 0; m < m_count; ++m) out[m] = grad(base_h, blocks[m]);
      return concat(out);
    };
    auto h_value = [base_h, weights, dims, m_count](const Vec& x) {
      auto blocks = split(x, dims);
      double s = 0.0;
      for (std::size_t m = 0; m < m_count; ++m)
        s += weights[m] * try_value(base_h, blocks[m]).value_or(0.0);
      return s;
    };
    auto info = base.h.smooth_info();
    lp.h = Fun::custom_smooth(h_grad, *info, nd, h_value, nullptr,
                              base_h.thread_safe(), "consensus(h)");
    lp.L = LinOp::identity(nd);
    lp.dim = nd;
    return lp;
  }

  // Stacked (weighted dual metric): the primal space is unchanged.
  detail::check_weights(weights, /*sum_to_one=*/false);
  std::vector<LinOp> ops;
  std::vector<std::size_t> udims;
  std::vector<Fun> gs;
  for (const Term& t : base.terms) {
    ops.push_back(t.L);
    udims.push_back(t.L.out_dim());
    gs.push_back(t.g);
  }
  LinOp stacked = LinOp::stacked(ops, weights);
  if (std::all_of(base.terms.begin(), base.terms.end(),
                  [](const Term& t) { return t.L.norm_bound().has_value(); })) {
    // ||L||^2 = ||sum w_m L_m^* L_m|| <= sum w_m ||L_m||^2
    double b = 0.0;
    for (std::size_t m = 0; m < base.terms.size(); ++m) {
      const double bm = *base.terms[m].L.norm_bound();
      b += weights[m] * bm * bm;
    }
    stacked = stacked.with_norm_bound(std::sqrt(b));
  }
  const std::size_t m_count2 = m_count;
  auto g_prox = [gs, weights, udims, m_count2](double gamma, const Vec& u) {
    auto blocks = split(u, udims);
    std::vector<Vec> out(m_count2);
    for (std::size_t m = 0; m < m_count2; ++m)
      out[m] = prox(gs[m], gamma / weights[m], blocks[m]).point;
    return concat(out);
  };
  // conjugate prox in the weighted metric: block m is
  //   (1/w_m) prox_{gamma w_m g_m^*}(w_m u_m),
  // with the per-block conjugate itself obtained via the Moreau identity.
  auto g_conj = [gs, weights, udims, m_count2](double gamma, const Vec& u) {
    auto blocks = split(u, udims);
    std::vector<Vec> out(m_count2);
    for (std::size_t m = 0; m < m_count2; ++m)
      out[m] = (1.0 / weights[m]) *
               prox_conjugate(gs[m], gamma * weights[m], weights[m] * blocks[m]).point;
    return concat(out);
  };
  auto g_value = [gs, udims, m_count2](const Vec& u) {
    auto blocks = split(u, udims);
    double s = 0.0;
    for (std::size_t m = 0; m < m_count2; ++m)
      s += try_value(gs[m], blocks[m]).value_or(0.0);
    return s;
  };
  bool safe = true;
  for (const Fun& g : gs) safe = safe && g.thread_safe();
  lp.f = base.f;
  lp.g = Fun::custom(g_prox, stacked.out_dim(), g_value, g_conj, safe, "stacked(g)");
  lp.L = stacked;
  lp.h = base.h;
  lp.dim = base.dim;
  return lp;
}

// Duals of the lifted run, rescaled back to the original metric (u_m -> w_m u_m).
inline std::vector<Vec> recover_duals(const LiftedProblem& lp, const Vec& lifted_u) {
  if (lp.mode != LiftMode::Stacked)
    throw ContractViolation("recover_duals: stacked mode only");
  std::vector<std::size_t> udims;
  for (const Term& t : lp.base.terms) udims.push_back(t.L.out_dim());
  auto blocks = split(lifted_u, udims);
  for (std::size_t m = 0; m < blocks.size(); ++m) blocks[m] = lp.weights[m] * blocks[m];
  return blocks;
}

// Explicit consensus iterations (all L_m = Id): Douglas-Rachford forms I/II
// and Davis-Yin over the blocks s_1..s_M, concatenated into the primary.
inline StepMap make_parallel_consensus_step(Fun f, std::vector<Fun> gs, Fun h,
                                            double tau, std::vector<double> weights,
                                            ParallelFamily family, int threads = 1) {
  if (gs.empty() || gs.size() != weights.size())
    throw ContractViolation("parallel consensus: one weight per block required");
  detail::check_weights(weights, /*sum_to_one=*/true);
  detail::require_parallel_safe(gs, threads);
  if (family != ParallelFamily::DR_I && family != ParallelFamily::DR_II &&
      family != ParallelFamily::DY)
    throw ContractViolation("parallel consensus: family must be DR or DY");
  const std::size_t m_count = gs.size();

  return [f, gs, h, tau, weights, family, threads, m_count](const IterState& z,
                                                            double rho) {
    const std::size_t n = z.primary.dim() / m_count;
    std::vector<std::size_t> dims(m_count, n);
    auto s = split(z.primary, dims);
    StepResult out;
    std::vector<Vec> half(m_count);
    Vec xh;
    if (family == ParallelFamily::DR_II) {
      std::vector<Vec> xm(m_count);
      detail::for_each_block(m_count, threads, [&](std::size_t m) {
        xm[m] = prox(gs[m], tau / weights[m], s[m]).point;
      });
      std::vector<Vec> refl(m_count);
      for (std::size_t m = 0; m < m_count; ++m) refl[m] = 2.0 * xm[m] - s[m];
      xh = prox(f, tau, weighted_sum_ordered(refl, weights)).point;
      for (std::size_t m = 0; m < m_count; ++m) half[m] = s[m] + (xh - xm[m]);
    } else {
      xh = prox(f, tau, weighted_sum_ordered(s, weights)).point;
      Vec head = xh;
      if (family == ParallelFamily::DY) head = axpy(-tau, grad(h, xh), xh);
      // block targets 2 x_half - s_m (- tau grad h for Davis-Yin)
      detail::for_each_block(m_count, threads, [&](std::size_t m) {
        Vec target = (xh + head) - s[m];
        Vec w = prox(gs[m], tau / weights[m], target).point;
        half[m] = s[m] + (w - xh);
      });
    }
    out.half.primary = concat(half);
    out.half.aux.emplace("x_half", std::move(xh));
    out.next = relax_state(z, out.half, rho);
    return out;
  };
}

// Explicit stacked iterations with per-block duals u_m and step sizes
// sigma_m. CP and CV keep the primal x as the primary block; LV and PD3O
// carry s~ = x + tau sum_m L_m^* u_m (LV) / the shifted primal (PD3O).
inline StepMap make_parallel_primal_dual_step(Fun f, std::vector<Term> terms, Fun h,
                                              double tau, std::vector<double> sigmas,
                                              ParallelFamily family, int threads = 1) {
  if (terms.empty() || terms.size() != sigmas.size())
    throw ContractViolation("parallel primal-dual: one sigma per term required");
  {
    std::vector<Fun> gs;
    for (const Term& t : terms) gs.push_back(t.g);
    detail::require_parallel_safe(gs, threads);
  }
  const std::size_t m_count = terms.size();

  auto adjoint_sum = [terms, m_count](const std::vector<Vec>& us) {
    std::vector<Vec> parts(m_count);
    for (std::size_t m = 0; m < m_count; ++m) parts[m] = terms[m].L.adjoint(us[m]);
    return sum_ordered(parts);
  };

  switch (family) {
    case ParallelFamily::CP_I:
    case ParallelFamily::CV_I: {
      const bool with_h = family == ParallelFamily::CV_I;
      return [f, terms, h, tau, sigmas, threads, m_count, adjoint_sum, with_h](
                 const IterState& z, double rho) {
        const Vec& x = z.primary;
        Vec drive = axpy(-tau, adjoint_sum(z.duals), x);
        if (with_h) drive = axpy(-tau, grad(h, x), drive);
        Vec xh = prox(f, tau, drive).point;
        Vec refl = 2.0 * xh - x;
        StepResult out;
        out.half.duals.resize(m_count);
        detail::for_each_block(m_count, threads, [&](std::size_t m) {
          out.half.duals[m] =
              prox_conjugate(terms[m].g, sigmas[m],
                             axpy(sigmas[m], terms[m].L.apply(refl), z.duals[m]))
                  .point;
        });
        out.half.primary = std::move(xh);
        out.next = relax_state(z, out.half, rho);
        return out;
      };
    }
    case ParallelFamily::CP_II:
    case ParallelFamily::CV_II: {
      const bool with_h = family == ParallelFamily::CV_II;
      return [f, terms, h, tau, sigmas, threads, m_count, adjoint_sum, with_h](
                 const IterState& z, double rho) {
        const Vec& x = z.primary;
        StepResult out;
        out.half.duals.resize(m_count);
        detail::for_each_block(m_count, threads, [&](std::size_t m) {
          out.half.duals[m] =
              prox_conjugate(terms[m].g, sigmas[m],
                             axpy(sigmas[m], terms[m].L.apply(x), z.duals[m]))
                  .point;
        });
        std::vector<Vec> extr(m_count);
        for (std::size_t m = 0; m < m_count; ++m)
          extr[m] = 2.0 * out.half.duals[m] - z.duals[m];
        Vec drive = axpy(-tau, adjoint_sum(extr), x);
        if (with_h) drive = axpy(-tau, grad(h, x), drive);
        out.half.primary = prox(f, tau, drive).point;
        out.next = relax_state(z, out.half, rho);
        return out;
      };
    }
    case ParallelFamily::LV:
    case ParallelFamily::PD3O: {
      const bool with_f = family == ParallelFamily::PD3O;
      return [f, terms, h, tau, sigmas, threads, m_count, adjoint_sum, with_f](
                 const IterState& z, double rho) {
        const Vec& st = z.primary;
        Vec base = axpy(-tau, adjoint_sum(z.duals), st);
        Vec xh = with_f ? prox(f, tau, base).point : base;
        Vec a = axpy(-tau, grad(h, xh), xh) - st;
        Vec probe = xh + a;
        StepResult out;
        out.half.duals.resize(m_count);
        detail::for_each_block(m_count, threads, [&](std::size_t m) {
          out.half.duals[m] =
              prox_conjugate(terms[m].g, sigmas[m],
                             axpy(sigmas[m], terms[m].L.apply(probe), z.duals[m]))
                  .point;
        });
        out.half.primary = st + a;
        out.half.aux.emplace("x_half", std::move(xh));
        out.next = relax_state(z, out.half, rho);
        return out;
      };
    }
    default:
      throw ContractViolation("parallel primal-dual: family must be CP/CV/LV/PD3O");
  }
}

// s~ initialization for the parallel LV/PD3O state from primal/dual starts.
inline IterState parallel_lv_initial_state(const std::vector<Term>& terms, double tau,
                                           const Vec& x0, const std::vector<Vec>& u0) {
  std::vector<Vec> parts(terms.size());
  for (std::size_t m = 0; m < terms.size(); ++m) parts[m] = terms[m].L.adjoint(u0[m]);
  IterState z;
  z.primary = axpy(tau, sum_ordered(parts), x0);
  z.duals = u0;
  return z;
}

}  // namespace proxsplit
