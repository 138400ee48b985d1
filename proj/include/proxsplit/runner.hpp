#pragma once

// Maps a problem plus solver configuration onto a concrete step map,
// validates the step sizes against the admissibility table, and drives the
// iteration with trace recording. This is the layer the command line tool
// and the acceptance experiments sit on.

#include <chrono>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "proxsplit/driver.hpp"
#include "proxsplit/oracles.hpp"
#include "proxsplit/problem.hpp"
#include "proxsplit/product.hpp"
#include "proxsplit/stationary.hpp"
#include "proxsplit/steps.hpp"
#include "proxsplit/validate.hpp"

namespace proxsplit {

namespace detail {
inline bool is_quadratic_foldable(const Fun& h) {
  // kinds whose prox is available, so the smooth slot can move to the f slot
  return h.kind() == FunKind::Quadratic || h.kind() == FunKind::SquaredL2 ||
         h.kind() == FunKind::LinearTerm;
}
}  // namespace detail

// Rearrange a problem for algorithms that take fewer slots than the full
// template: a single identity-composed term may fold into a free f slot
// (proximal-gradient style), and a quadratic h is moved behind the f-prox
// for the prox-only algorithms.
inline ProblemSpec arrange_for(Algorithm alg, const ProblemSpec& p) {
  ProblemSpec q = p;
  auto fold_term_into_f = [&q]() {
    if (q.terms.size() == 1 && q.terms[0].L.kind() == OpKind::Identity &&
        q.f.kind() == FunKind::Zero) {
      q.f = q.terms[0].g;
      q.terms.clear();
    }
  };
  auto fold_h_into_f = [&q]() {
    if (q.f.kind() == FunKind::Zero && q.h.kind() != FunKind::Zero &&
        detail::is_quadratic_foldable(q.h)) {
      q.f = q.h;
      q.h = Fun::zero();
    }
  };
  switch (alg) {
    case Algorithm::FB:
      fold_term_into_f();
      if (!q.terms.empty())
        throw ContractViolation("fb: expects f + h (one identity term folds into f)");
      return q;
    case Algorithm::PPA:
      fold_term_into_f();
      fold_h_into_f();
      if (!q.terms.empty() || q.h.kind() != FunKind::Zero)
        throw ContractViolation("ppa: expects a single proximable function");
      return q;
    case Algorithm::DR: {
      if (q.terms.empty()) throw ContractViolation("dr: expects one g term");
      if (q.h.kind() != FunKind::Zero && q.h.kind() != FunKind::LinearTerm) fold_h_into_f();
      if (q.h.kind() != FunKind::Zero && q.h.kind() != FunKind::LinearTerm)
        throw ContractViolation("dr: smooth term must be zero, linear, or foldable into f");
      if (q.terms.size() == 1 && q.terms[0].L.kind() != OpKind::Identity)
        throw ContractViolation("dr: the composed operator must be the identity");
      return q;
    }
    case Algorithm::ADMM:
    case Algorithm::ADMM_ALT: {
      fold_h_into_f();
      if (q.terms.size() != 1 || q.terms[0].L.kind() != OpKind::Identity ||
          q.h.kind() != FunKind::Zero)
        throw ContractViolation("admm: expects f + g with identity coupling");
      return q;
    }
    case Algorithm::LIFTED_ADMM: {
      fold_h_into_f();
      if (q.terms.size() != 1 || q.h.kind() != FunKind::Zero)
        throw ContractViolation("lifted-admm: expects f + g(Lx)");
      return q;
    }
    case Algorithm::CP_I:
    case Algorithm::CP_II: {
      fold_h_into_f();
      if (q.terms.empty() || q.h.kind() != FunKind::Zero)
        throw ContractViolation("cp: expects f + g(Lx) with no smooth term");
      return q;
    }
    case Algorithm::PMM: {
      if (q.terms.size() != 1 || q.f.kind() != FunKind::Zero ||
          (q.h.kind() != FunKind::Zero && q.h.kind() != FunKind::LinearTerm))
        throw ContractViolation("pmm: expects g(Lx) + <x,c>");
      return q;
    }
    case Algorithm::LV: {
      if (q.terms.empty() || q.f.kind() != FunKind::Zero)
        throw ContractViolation("lv: expects g(Lx) + h (no f slot)");
      return q;
    }
    case Algorithm::PDFP:
    case Algorithm::CV_I:
    case Algorithm::CV_II:
    case Algorithm::PD3O: {
      if (q.terms.empty())
        throw ContractViolation("pdfp/cv/pd3o: expects f + g(Lx) + h");
      return q;
    }
    case Algorithm::DY: {
      if (q.terms.empty())
        throw ContractViolation("dy: expects f + g + h");
      for (const Term& t : q.terms)
        if (t.L.kind() != OpKind::Identity)
          throw ContractViolation("dy: the composed operators must be the identity");
      return q;
    }
    case Algorithm::GCP:
    case Algorithm::EGCP: {
      if (q.terms.size() != 2 || q.f.kind() != FunKind::Zero ||
          (q.h.kind() != FunKind::Zero && q.h.kind() != FunKind::LinearTerm))
        throw ContractViolation("gcp: expects f(Kx) + g(Lx) + <x,c>");
      if (alg == Algorithm::EGCP && !q.dual_quadratic)
        throw ContractViolation("egcp: requires the dual quadratic block");
      return q;
    }
    case Algorithm::PDDR_QUAD_I:
    case Algorithm::PDDR_QUAD_II: {
      if (q.terms.size() != 1 || !q.h.is_quadratic_kind())
        throw ContractViolation("pddr: expects f + g(Lx) + quadratic h");
      return q;
    }
  }
  throw ContractViolation("arrange_for: unreachable");
}

struct Assembled {
  ProblemSpec problem;  // arranged
  StepMap step;
  IterState init;
  // objective reported on the half-step solution estimate
  std::function<double(const StepResult&)> trace_objective;
};

inline Vec solution_estimate(const StepResult& step) {
  auto it = step.half.aux.find("x_half");
  return it != step.half.aux.end() ? it->second : step.half.primary;
}

inline Assembled assemble(const ProblemSpec& problem, const SolverConfig& cfg) {
  Assembled a;
  a.problem = arrange_for(cfg.algorithm, problem);
  const ProblemSpec& q = a.problem;
  const std::size_t n = q.dim;
  const std::size_t m_terms = q.terms.size();
  auto tau = [&] { return *cfg.tau; };
  auto sigma = [&] { return *cfg.sigma; };
  std::vector<double> weights(m_terms, m_terms ? 1.0 / static_cast<double>(m_terms) : 1.0);
  if (cfg.weights) weights = *cfg.weights;

  ProblemSpec objective_problem = q;
  a.trace_objective = [objective_problem](const StepResult& s) {
    return objective(objective_problem, solution_estimate(s));
  };
  a.init.primary = Vec(n);

  switch (cfg.algorithm) {
    case Algorithm::FB:
      a.step = make_fb_step(q.f, q.h, *cfg.gamma);
      return a;
    case Algorithm::PPA:
      a.step = make_fb_step(q.f, Fun::zero(), *cfg.gamma);
      return a;
    case Algorithm::DR: {
      if (m_terms > 1) {
        std::vector<Fun> gs;
        for (const Term& t : q.terms) gs.push_back(t.g);
        a.step = make_parallel_consensus_step(q.f, gs, Fun::zero(), tau(), weights,
                                              ParallelFamily::DR_I, cfg.threads);
        a.init.primary = Vec(n * m_terms);
        return a;
      }
      std::optional<Vec> drift;
      if (q.h.kind() == FunKind::LinearTerm) drift = q.h.linear_part();
      a.step = make_dr_step(q.f, q.terms[0].g, tau(), drift);
      return a;
    }
    case Algorithm::ADMM:
    case Algorithm::ADMM_ALT: {
      a.step = cfg.algorithm == Algorithm::ADMM
                   ? make_admm_step(q.f, q.terms[0].g, tau())
                   : make_admm_alt_step(q.f, q.terms[0].g, tau());
      a.init.duals.push_back(Vec(n));
      return a;
    }
    case Algorithm::LIFTED_ADMM: {
      const LinOp& L = q.terms[0].L;
      const std::size_t u_dim = L.out_dim();
      auto neg = [](const Vec& v) { return -v; };
      LinOp negid = LinOp::custom(u_dim, u_dim, neg, neg, 1.0, "neg-identity");
      a.step = make_lifted_admm_step(q.f, L, q.terms[0].g, negid, Vec(u_dim), tau());
      a.init.primary = Vec(u_dim);
      return a;
    }
    case Algorithm::CP_I:
    case Algorithm::CP_II: {
      const PdForm form = cfg.algorithm == Algorithm::CP_I ? PdForm::I : PdForm::II;
      if (m_terms > 1) {
        std::vector<double> sigmas = term_sigmas(q, cfg, sigma());
        a.step = make_parallel_primal_dual_step(
            q.f, q.terms, Fun::zero(), tau(), sigmas,
            form == PdForm::I ? ParallelFamily::CP_I : ParallelFamily::CP_II,
            cfg.threads);
        for (const Term& t : q.terms) a.init.duals.push_back(Vec(t.L.out_dim()));
        return a;
      }
      a.step = make_cp_step(q.f, q.terms[0].g, q.terms[0].L, tau(), sigma(), form);
      a.init.duals.push_back(Vec(q.terms[0].L.out_dim()));
      return a;
    }
    case Algorithm::PMM: {
      Vec c = q.h.kind() == FunKind::LinearTerm ? q.h.linear_part() : Vec(n);
      a.step = make_pmm_step(q.terms[0].g, q.terms[0].L, c, tau(), sigma());
      a.init.duals.push_back(Vec(q.terms[0].L.out_dim()));
      return a;
    }
    case Algorithm::LV: {
      if (m_terms > 1) {
        std::vector<double> sigmas = term_sigmas(q, cfg, sigma());
        a.step = make_parallel_primal_dual_step(Fun::zero(), q.terms, q.h, tau(), sigmas,
                                                ParallelFamily::LV, cfg.threads);
        for (const Term& t : q.terms) a.init.duals.push_back(Vec(t.L.out_dim()));
        return a;
      }
      a.step = make_lv_step(q.terms[0].g, q.terms[0].L, q.h, tau(), sigma());
      a.init.duals.push_back(Vec(q.terms[0].L.out_dim()));
      return a;
    }
    case Algorithm::PDFP: {
      a.step = make_pdfp_step(q.f, q.terms[0].g, q.terms[0].L, q.h, tau(), sigma());
      a.init.duals.push_back(Vec(q.terms[0].L.out_dim()));
      return a;
    }
    case Algorithm::GCP:
    case Algorithm::EGCP: {
      const Term& kterm = q.terms[0];
      const Term& lterm = q.terms[1];
      Vec c = q.h.kind() == FunKind::LinearTerm ? q.h.linear_part() : Vec(n);
      if (cfg.algorithm == Algorithm::GCP) {
        a.step = make_gcp_step(kterm.g, kterm.L, lterm.g, lterm.L, c, tau(), sigma(),
                               *cfg.eta);
      } else {
        a.step = make_egcp_step(kterm.g, kterm.L, lterm.g, lterm.L, c,
                                q.dual_quadratic->Q, q.dual_quadratic->t, tau(),
                                sigma(), *cfg.eta);
        // dual objective: f*(v) + (1/2)<v,Qv> + <v,t> + g*(u)
        Fun fk = kterm.g, gl = lterm.g;
        LinOp qd = q.dual_quadratic->Q;
        Vec td = q.dual_quadratic->t;
        a.trace_objective = [fk, gl, qd, td](const StepResult& s) {
          const Vec& u = s.half.duals.at(0);
          const Vec& v = s.half.duals.at(1);
          double val = conjugate_value(gl, u);
          val += conjugate_value(fk, v) + 0.5 * dot(v, qd.apply(v)) + dot(v, td);
          return val;
        };
      }
      a.init.duals.push_back(Vec(lterm.L.out_dim()));
      a.init.duals.push_back(Vec(kterm.L.out_dim()));
      return a;
    }
    case Algorithm::CV_I:
    case Algorithm::CV_II: {
      const PdForm form = cfg.algorithm == Algorithm::CV_I ? PdForm::I : PdForm::II;
      if (m_terms > 1) {
        std::vector<double> sigmas = term_sigmas(q, cfg, sigma());
        a.step = make_parallel_primal_dual_step(
            q.f, q.terms, q.h, tau(), sigmas,
            form == PdForm::I ? ParallelFamily::CV_I : ParallelFamily::CV_II,
            cfg.threads);
      } else {
        a.step = make_cv_step(q.f, q.terms[0].g, q.terms[0].L, q.h, tau(), sigma(), form);
      }
      for (const Term& t : q.terms) a.init.duals.push_back(Vec(t.L.out_dim()));
      return a;
    }
    case Algorithm::PD3O: {
      if (m_terms > 1) {
        std::vector<double> sigmas = term_sigmas(q, cfg, sigma());
        a.step = make_parallel_primal_dual_step(q.f, q.terms, q.h, tau(), sigmas,
                                                ParallelFamily::PD3O, cfg.threads);
        for (const Term& t : q.terms) a.init.duals.push_back(Vec(t.L.out_dim()));
        return a;
      }
      a.step = make_pd3o_step(q.f, q.terms[0].g, q.terms[0].L, q.h, tau(), sigma());
      a.init.duals.push_back(Vec(q.terms[0].L.out_dim()));
      return a;
    }
    case Algorithm::DY: {
      if (m_terms > 1) {
        std::vector<Fun> gs;
        for (const Term& t : q.terms) gs.push_back(t.g);
        a.step = make_parallel_consensus_step(q.f, gs, q.h, tau(), weights,
                                              ParallelFamily::DY, cfg.threads);
        a.init.primary = Vec(n * m_terms);
        return a;
      }
      a.step = make_dy_step(q.f, q.terms[0].g, q.h, tau());
      return a;
    }
    case Algorithm::PDDR_QUAD_I:
    case Algorithm::PDDR_QUAD_II: {
      const PdForm form =
          cfg.algorithm == Algorithm::PDDR_QUAD_I ? PdForm::I : PdForm::II;
      a.step = make_pddr_quad_step(q.f, q.terms[0].g, q.terms[0].L,
                                   q.h.quadratic_op(n), q.h.quadratic_lin(n), tau(),
                                   sigma(), form);
      a.init.duals.push_back(Vec(q.terms[0].L.out_dim()));
      return a;
    }
  }
  throw ContractViolation("assemble: unreachable");
}

struct TraceRecord {
  int iter = 0;
  double fixed_point_residual = 0.0;
  double objective = 0.0;
  std::optional<double> dist_P;
  double wall_clock = 0.0;  // seconds since the run started
};

struct RunOptions {
  bool unsafe = false;
  int trace_every = 0;  // keep a record every k iterations (0 = none)
  std::optional<OracleSolution> oracle;  // enables dist_P and the gap stop
  std::optional<double> objective_gap_tol;
};

struct RunOutcome {
  ValidationReport validation;
  bool rejected = false;  // validation failed and unsafe was not set
  bool unsafe_used = false;
  DriveResult drive;
  double final_objective = 0.0;
  std::vector<TraceRecord> trace;
};

inline RunOutcome run_solver(const ProblemSpec& problem, const SolverConfig& cfg,
                             const RunOptions& opt = {}) {
  Assembled a = assemble(problem, cfg);
  RunOutcome out;
  out.validation = validate_params(cfg, a.problem);
  if (!out.validation.admissible) {
    if (!opt.unsafe) {
      out.rejected = true;
      return out;
    }
    out.unsafe_used = true;
  }

  std::optional<IterState> star;
  if (opt.oracle) {
    try {
      star = stationary_state(cfg.algorithm, a.problem, cfg, *opt.oracle);
    } catch (const Error&) {
      star.reset();  // no stationary construction for this algorithm
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  DriveHooks hooks;
  double last_objective = 0.0;
  auto& trace = out.trace;
  hooks.on_step = [&](const IterState& state, const StepResult& step, int iter,
                      double residual) {
    last_objective = a.trace_objective(step);
    if (opt.trace_every > 0 && iter % opt.trace_every == 0) {
      TraceRecord rec;
      rec.iter = iter;
      rec.fixed_point_residual = residual;
      rec.objective = last_objective;
      if (star)
        rec.dist_P = metric_dist(cfg.algorithm, a.problem, cfg, state, *star);
      rec.wall_clock =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      trace.push_back(rec);
    }
  };

  DriveConfig dcfg;
  dcfg.rho = cfg.rho;
  dcfg.max_iter = cfg.max_iter;
  dcfg.stop_tol = cfg.stop_tol;
  if (opt.oracle && opt.objective_gap_tol) {
    auto obj = a.trace_objective;
    const double target = opt.oracle->objective;
    dcfg.gap_stop =
        GapStop{[obj](const IterState& half) {
                  StepResult s;
                  s.half = half;
                  return obj(s);
                },
                target, *opt.objective_gap_tol};
  }
  out.drive = relaxed_drive(a.step, a.init, dcfg, hooks);
  out.final_objective = last_objective;
  return out;
}

}  // namespace proxsplit
