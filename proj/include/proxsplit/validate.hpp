#pragma once

// The step-size admissibility table. Every convergence guarantee used by
// the engines is encoded here as named inequalities with explicit lhs/rhs,
// together with the relaxation cap delta it certifies. Strict and wide
// (boundary-permitting) variants of the same bound are both evaluated and
// reported; the wide variant is binding where one exists.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "proxsplit/driver.hpp"
#include "proxsplit/errors.hpp"
#include "proxsplit/linop.hpp"
#include "proxsplit/problem.hpp"

namespace proxsplit {

enum class Algorithm {
  FB, PPA, DR, ADMM, ADMM_ALT, LIFTED_ADMM, CP_I, CP_II, PMM, LV, PDFP,
  GCP, CV_I, CV_II, EGCP, PD3O, DY, PDDR_QUAD_I, PDDR_QUAD_II
};

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::FB: return "fb";
    case Algorithm::PPA: return "ppa";
    case Algorithm::DR: return "dr";
    case Algorithm::ADMM: return "admm";
    case Algorithm::ADMM_ALT: return "admm-alt";
    case Algorithm::LIFTED_ADMM: return "lifted-admm";
    case Algorithm::CP_I: return "cp";
    case Algorithm::CP_II: return "cp2";
    case Algorithm::PMM: return "pmm";
    case Algorithm::LV: return "lv";
    case Algorithm::PDFP: return "pdfp";
    case Algorithm::GCP: return "gcp";
    case Algorithm::CV_I: return "cv";
    case Algorithm::CV_II: return "cv2";
    case Algorithm::EGCP: return "egcp";
    case Algorithm::PD3O: return "pd3o";
    case Algorithm::DY: return "dy";
    case Algorithm::PDDR_QUAD_I: return "pddr";
    case Algorithm::PDDR_QUAD_II: return "pddr2";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(const std::string& s) {
  for (Algorithm a :
       {Algorithm::FB, Algorithm::PPA, Algorithm::DR, Algorithm::ADMM,
        Algorithm::ADMM_ALT, Algorithm::LIFTED_ADMM, Algorithm::CP_I, Algorithm::CP_II,
        Algorithm::PMM, Algorithm::LV, Algorithm::PDFP, Algorithm::GCP, Algorithm::CV_I,
        Algorithm::CV_II, Algorithm::EGCP, Algorithm::PD3O, Algorithm::DY,
        Algorithm::PDDR_QUAD_I, Algorithm::PDDR_QUAD_II})
    if (s == algorithm_name(a)) return a;
  return std::nullopt;
}

struct SolverConfig {
  Algorithm algorithm = Algorithm::FB;
  std::optional<double> tau, sigma, eta, gamma;
  RhoSchedule rho{1.0};
  int max_iter = 1000;
  double stop_tol = 0.0;
  bool quadratic_mode = false;
  int rho_burn_in = 0;
  std::optional<std::vector<double>> weights;  // product-space weights (default 1/M)
  int threads = 1;
};

struct Condition {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool strict = false;  // lhs < rhs required (vs lhs <= rhs)
  bool holds = false;
};

struct TheoremEval {
  std::string tag;
  bool admissible = false;
  double delta = 0.0;
  std::vector<Condition> conditions;
  bool pins_unit_rho = false;
};

struct ValidationReport {
  bool admissible = false;
  double delta = 0.0;
  std::string theorem_tag;
  std::vector<Condition> violated;
  std::vector<TheoremEval> evaluated;
  bool pins_unit_rho = false;
  std::vector<std::string> notes;
};

// Deterministic norm estimator for operator combinations assembled during
// validation (e.g. Q + sigma L*L).
struct NormProvider {
  double tol = 1e-6;
  int max_iter = 200000;
  std::uint64_t seed = 12345;
  double operator()(const LinOp& op) const { return estimate_norm(op, tol, max_iter, seed); }
};

namespace detail {

// Comparisons carry a relative equality band so that boundary settings
// derived from certified bounds (sigma = 1/(tau b^2)) classify as exact
// equality rather than falling on either side by rounding.
constexpr double kEqBand = 1e-12;

inline bool cond_holds(double lhs, double rhs, bool strict) {
  const double band = kEqBand * std::max(1.0, std::abs(rhs));
  return strict ? lhs < rhs - band : lhs <= rhs + band;
}

inline Condition make_cond(std::string name, double lhs, double rhs, bool strict) {
  Condition c{std::move(name), lhs, rhs, strict, false};
  c.holds = cond_holds(lhs, rhs, strict);
  return c;
}

inline TheoremEval finish(std::string tag, double delta, std::vector<Condition> cs,
                          bool pins_unit_rho = false) {
  TheoremEval e{std::move(tag), true, delta, std::move(cs), pins_unit_rho};
  for (const Condition& c : e.conditions) e.admissible = e.admissible && c.holds;
  if (!(e.delta > 0.0)) e.admissible = false;
  e.delta = std::clamp(e.delta, 0.0, 2.0);
  return e;
}

inline double require_step(const std::optional<double>& v, const char* name) {
  if (!v) throw ContractViolation(std::string("validate_params: step size '") + name +
                                  "' is required for this algorithm");
  if (!(*v > 0.0))
    throw ContractViolation(std::string("validate_params: step size '") + name +
                            "' must be positive");
  return *v;
}

inline void forbid_step(const std::optional<double>& v, const char* name) {
  if (v) throw ContractViolation(std::string("validate_params: step size '") + name +
                                 "' is not used by this algorithm");
}

}  // namespace detail

// Effective sigma_m = sigma * w_m (uniform 1/M default).
inline std::vector<double> term_sigmas(const ProblemSpec& p, const SolverConfig& cfg,
                                       double sigma) {
  const std::size_t m = p.terms.size();
  std::vector<double> w(m, 1.0 / static_cast<double>(m));
  if (cfg.weights) {
    if (cfg.weights->size() != m)
      throw ContractViolation("term_sigmas: one weight per term required");
    w = *cfg.weights;
  }
  for (double& wi : w) wi *= sigma;
  return w;
}

// ||sum_m sigma_m L_m^* L_m||, the product-space surrogate for sigma ||L||^2.
inline double stacked_gram_norm(const ProblemSpec& p, const std::vector<double>& sigmas,
                                const NormProvider& np) {
  std::vector<LinOp> grams;
  grams.reserve(p.terms.size());
  for (const Term& t : p.terms) grams.push_back(gram(t.L));
  return np(LinOp::scaled_sum(sigmas, grams, "sum sigma_m Lm*Lm"));
}

inline ValidationReport validate_params(const SolverConfig& cfg, const ProblemSpec& p,
                                        const NormProvider& np = {}) {
  using detail::finish;
  using detail::forbid_step;
  using detail::make_cond;
  using detail::require_step;

  const Algorithm alg = cfg.algorithm;
  const double beta = smooth_beta(p);
  const bool h_quadratic = p.h.is_quadratic_kind();
  const std::size_t m_terms = p.terms.size();

  if (cfg.quadratic_mode && !h_quadratic)
    throw ContractViolation("validate_params: quadratic_mode set but h is not quadratic");

  auto single_term_bound = [&]() -> double {
    if (m_terms != 1)
      throw ContractViolation("validate_params: algorithm expects exactly one g(L x) term");
    return p.terms[0].L.require_norm_bound();
  };

  std::vector<TheoremEval> evals;
  TheoremEval binding;
  std::vector<std::string> notes;

  switch (alg) {
    case Algorithm::FB:
    case Algorithm::PPA: {
      const double gamma = require_step(cfg.gamma, "gamma");
      forbid_step(cfg.tau, "tau");
      forbid_step(cfg.sigma, "sigma");
      forbid_step(cfg.eta, "eta");
      if (alg == Algorithm::PPA || beta == 0.0) {
        binding = finish(alg == Algorithm::PPA ? "ppa" : "fb-proximal-point", 2.0, {});
      } else if (cfg.quadratic_mode) {
        binding = finish("fb-quadratic", 2.0,
                         {make_cond("gamma <= 1/beta", gamma, 1.0 / beta, false)});
        evals.push_back(finish("fb-general", 2.0 - gamma * beta / 2.0,
                               {make_cond("gamma < 2/beta", gamma, 2.0 / beta, true)}));
      } else {
        binding = finish("fb-general", 2.0 - gamma * beta / 2.0,
                         {make_cond("gamma < 2/beta", gamma, 2.0 / beta, true)});
        if (h_quadratic)
          evals.push_back(finish("fb-quadratic", 2.0,
                                 {make_cond("gamma <= 1/beta", gamma, 1.0 / beta, false)}));
      }
      break;
    }

    case Algorithm::DR:
    case Algorithm::ADMM:
    case Algorithm::LIFTED_ADMM: {
      require_step(cfg.tau, "tau");
      forbid_step(cfg.gamma, "gamma");
      forbid_step(cfg.sigma, "sigma");
      forbid_step(cfg.eta, "eta");
      const char* tag = alg == Algorithm::DR     ? "dr"
                        : alg == Algorithm::ADMM ? "admm"
                                                 : "dr-postcomposed";
      binding = finish(tag, 2.0, {});
      break;
    }

    case Algorithm::ADMM_ALT: {
      require_step(cfg.tau, "tau");
      forbid_step(cfg.gamma, "gamma");
      forbid_step(cfg.sigma, "sigma");
      forbid_step(cfg.eta, "eta");
      const double phi = (std::sqrt(5.0) + 1.0) / 2.0;
      if (!cfg.rho.is_constant())
        throw ContractViolation("validate_params: admm-alt requires a constant rho");
      const double r = cfg.rho.constant_value();
      binding = finish("admm-alt-range", phi,
                       {make_cond("rho > 0", 0.0, r, true),
                        make_cond("rho < (sqrt(5)+1)/2", r, phi, true)});
      break;
    }

    case Algorithm::CP_I:
    case Algorithm::CP_II:
    case Algorithm::PMM: {
      const double tau = require_step(cfg.tau, "tau");
      const double sigma = require_step(cfg.sigma, "sigma");
      forbid_step(cfg.gamma, "gamma");
      forbid_step(cfg.eta, "eta");
      if (alg != Algorithm::PMM && m_terms > 1) {
        const double bsum = stacked_gram_norm(p, term_sigmas(p, cfg, sigma), np);
        binding = finish("cp-product", 2.0,
                         {make_cond("tau*||sum sigma_m Lm*Lm|| <= 1", tau * bsum, 1.0, false)});
      } else {
        const double b = single_term_bound();
        const double lhs = sigma * tau * b * b;
        const char* tag = alg == Algorithm::PMM ? "pmm" : "cp-wide";
        binding = finish(tag, 2.0, {make_cond("sigma*tau*||L||^2 <= 1", lhs, 1.0, false)});
        if (alg != Algorithm::PMM)
          evals.push_back(
              finish("cp-strict", 2.0, {make_cond("sigma*tau*||L||^2 < 1", lhs, 1.0, true)}));
      }
      break;
    }

    case Algorithm::LV: {
      const double tau = require_step(cfg.tau, "tau");
      const double sigma = require_step(cfg.sigma, "sigma");
      forbid_step(cfg.gamma, "gamma");
      forbid_step(cfg.eta, "eta");
      const double delta = beta > 0.0 ? 2.0 - tau * beta / 2.0 : 2.0;
      std::vector<Condition> base;
      if (beta > 0.0) base.push_back(make_cond("tau < 2/beta", tau, 2.0 / beta, true));
      double lhs;
      std::string cond_name;
      std::string suffix;
      if (m_terms > 1) {
        lhs = tau * stacked_gram_norm(p, term_sigmas(p, cfg, sigma), np);
        cond_name = "tau*||sum sigma_m Lm*Lm|| <= 1";
        suffix = "-product";
      } else {
        const double b = single_term_bound();
        lhs = sigma * tau * b * b;
        cond_name = "sigma*tau*||L||^2 <= 1";
      }
      if (cfg.quadratic_mode) {
        std::vector<Condition> cs{make_cond("tau <= 1/beta", tau,
                                            beta > 0.0 ? 1.0 / beta : 1e300, false),
                                  make_cond(cond_name, lhs, 1.0, false)};
        binding = finish("lv-quadratic" + suffix, 2.0, std::move(cs));
      } else {
        std::vector<Condition> cs = base;
        cs.push_back(make_cond(cond_name, lhs, 1.0, false));
        binding = finish("lv-wide" + suffix, delta, std::move(cs));
      }
      {
        std::vector<Condition> cs = base;
        cs.push_back(make_cond(
            m_terms > 1 ? "tau*||sum sigma_m Lm*Lm|| < 1" : "sigma*tau*||L||^2 < 1", lhs,
            1.0, true));
        evals.push_back(finish("lv-strict" + suffix, delta, std::move(cs)));
      }
      break;
    }

    case Algorithm::PDFP: {
      const double tau = require_step(cfg.tau, "tau");
      const double sigma = require_step(cfg.sigma, "sigma");
      forbid_step(cfg.gamma, "gamma");
      forbid_step(cfg.eta, "eta");
      const double b = single_term_bound();
      const double lhs = sigma * tau * b * b;
      std::vector<Condition> cs;
      if (beta > 0.0) cs.push_back(make_cond("tau < 2/beta", tau, 2.0 / beta, true));
      cs.push_back(make_cond("sigma*tau*||L||^2 < 1", lhs, 1.0, true));
      const bool affine_prox =
          p.f.kind() == FunKind::Zero || p.f.kind() == FunKind::LinearTerm ||
          p.f.kind() == FunKind::Quadratic || p.f.kind() == FunKind::SquaredL2 ||
          p.f.kind() == FunKind::AffineIndicator;
      if (affine_prox) {
        binding = finish("pdfp-affine", beta > 0.0 ? 2.0 - tau * beta / 2.0 : 2.0,
                         std::move(cs));
      } else {
        // Relaxation of the general case is open; the admissible schedule is
        // rho == 1 only.
        binding = finish("pdfp-general", 1.0, std::move(cs), /*pins_unit_rho=*/true);
        notes.push_back("pdfp: non-affine prox of f pins rho = 1");
      }
      break;
    }

    case Algorithm::GCP:
    case Algorithm::EGCP: {
      const double tau = require_step(cfg.tau, "tau");
      const double sigma = require_step(cfg.sigma, "sigma");
      const double eta = require_step(cfg.eta, "eta");
      forbid_step(cfg.gamma, "gamma");
      if (m_terms != 2)
        throw ContractViolation(
            "validate_params: gcp/egcp expect two composed terms f(Kx) + g(Lx)");
      const double bk = p.terms[0].L.require_norm_bound();
      const double bl = p.terms[1].L.require_norm_bound();
      if (alg == Algorithm::GCP) {
        binding = finish("gcp-wide", 2.0,
                         {make_cond("sigma*tau*||L||^2 <= 1", sigma * tau * bl * bl, 1.0, false),
                          make_cond("eta*tau*||K||^2 <= 1", eta * tau * bk * bk, 1.0, false)});
        evals.push_back(
            finish("gcp-strict", 2.0,
                   {make_cond("sigma*tau*||L||^2 < 1", sigma * tau * bl * bl, 1.0, true),
                    make_cond("eta*tau*||K||^2 < 1", eta * tau * bk * bk, 1.0, true)}));
      } else {
        if (!p.dual_quadratic)
          throw ContractViolation("validate_params: egcp requires the dual quadratic block");
        const LinOp& k = p.terms[0].L;
        const double combo =
            np(LinOp::scaled_sum({tau, 1.0}, {cogram(k), p.dual_quadratic->Q},
                                 "tau*KK* + Q"));
        binding = finish(
            "egcp", 2.0,
            {make_cond("sigma*tau*||L||^2 < 1", sigma * tau * bl * bl, 1.0, true),
             make_cond("eta*tau*||K||^2 < 1", eta * tau * bk * bk, 1.0, true),
             make_cond("eta*||tau*KK* + Q|| <= 1", eta * combo, 1.0, false)});
      }
      break;
    }

    case Algorithm::CV_I:
    case Algorithm::CV_II: {
      const double tau = require_step(cfg.tau, "tau");
      const double sigma = require_step(cfg.sigma, "sigma");
      forbid_step(cfg.gamma, "gamma");
      forbid_step(cfg.eta, "eta");
      double sig_norm;  // sigma ||L||^2 or its product-space surrogate
      std::string suffix;
      if (m_terms > 1) {
        sig_norm = stacked_gram_norm(p, term_sigmas(p, cfg, sigma), np);
        suffix = "-product";
      } else {
        const double b = single_term_bound();
        sig_norm = sigma * b * b;
      }
      if (cfg.quadratic_mode) {
        LinOp q = p.h.quadratic_op(p.dim);
        std::vector<LinOp> parts{q};
        std::vector<double> coeffs{1.0};
        if (m_terms > 1) {
          for (const Term& t : p.terms) parts.push_back(gram(t.L));
          for (double sm : term_sigmas(p, cfg, sigma)) coeffs.push_back(sm);
        } else {
          parts.push_back(gram(p.terms[0].L));
          coeffs.push_back(sigma);
        }
        const double combo = np(LinOp::scaled_sum(coeffs, parts, "Q + sigma L*L"));
        binding = finish("cv-quadratic" + suffix, 2.0,
                         {make_cond("tau*sigma*||L||^2 < 1", tau * sig_norm, 1.0, true),
                          make_cond("tau*||Q + sigma*L*L|| <= 1", tau * combo, 1.0, false)});
      } else {
        const double lhs = tau * (sig_norm + beta / 2.0);
        const double denom = 1.0 / tau - sig_norm;
        const double delta = denom > 0.0 ? 2.0 - (beta / 2.0) / denom : 0.0;
        binding = finish("cv-general" + suffix, delta,
                         {make_cond("tau*(sigma*||L||^2 + beta/2) < 1", lhs, 1.0, true)});
      }
      break;
    }

    case Algorithm::PD3O: {
      const double tau = require_step(cfg.tau, "tau");
      const double sigma = require_step(cfg.sigma, "sigma");
      forbid_step(cfg.gamma, "gamma");
      forbid_step(cfg.eta, "eta");
      const double delta = beta > 0.0 ? 2.0 - tau * beta / 2.0 : 2.0;
      std::vector<Condition> base;
      if (beta > 0.0) base.push_back(make_cond("tau < 2/beta", tau, 2.0 / beta, true));
      double lhs;
      std::string cond_name, suffix;
      if (m_terms > 1) {
        lhs = tau * stacked_gram_norm(p, term_sigmas(p, cfg, sigma), np);
        cond_name = "tau*||sum sigma_m Lm*Lm|| <= 1";
        suffix = "-product";
      } else {
        const double b = single_term_bound();
        lhs = sigma * tau * b * b;
        cond_name = "sigma*tau*||L||^2 <= 1";
      }
      {
        std::vector<Condition> cs = base;
        cs.push_back(make_cond(cond_name, lhs, 1.0, false));
        binding = finish("pd3o-wide" + suffix, delta, std::move(cs));
      }
      {
        std::vector<Condition> cs = base;
        cs.push_back(make_cond(
            m_terms > 1 ? "tau*||sum sigma_m Lm*Lm|| < 1" : "sigma*tau*||L||^2 < 1", lhs,
            1.0, true));
        evals.push_back(finish("pd3o-strict" + suffix, delta, std::move(cs)));
      }
      break;
    }

    case Algorithm::DY: {
      const double tau = require_step(cfg.tau, "tau");
      forbid_step(cfg.gamma, "gamma");
      forbid_step(cfg.sigma, "sigma");
      forbid_step(cfg.eta, "eta");
      std::vector<Condition> cs;
      if (beta > 0.0) cs.push_back(make_cond("tau < 2/beta", tau, 2.0 / beta, true));
      binding = finish(m_terms > 1 ? "dy-consensus" : "dy",
                       beta > 0.0 ? 2.0 - tau * beta / 2.0 : 2.0, std::move(cs));
      break;
    }

    case Algorithm::PDDR_QUAD_I:
    case Algorithm::PDDR_QUAD_II: {
      const double tau = require_step(cfg.tau, "tau");
      const double sigma = require_step(cfg.sigma, "sigma");
      forbid_step(cfg.gamma, "gamma");
      forbid_step(cfg.eta, "eta");
      if (!h_quadratic)
        throw ContractViolation("validate_params: pddr requires a quadratic h");
      const double b = single_term_bound();
      std::vector<Condition> cs;
      if (beta > 0.0) cs.push_back(make_cond("tau < 2/beta", tau, 2.0 / beta, true));
      cs.push_back(make_cond("sigma*tau*||L||^2 < 1", sigma * tau * b * b, 1.0, true));
      binding = finish("pddr-quadratic", 2.0, std::move(cs));
      break;
    }
  }

  ValidationReport report;
  report.theorem_tag = binding.tag;
  report.delta = binding.delta;
  report.pins_unit_rho = binding.pins_unit_rho;
  report.admissible = binding.admissible;
  for (const Condition& c : binding.conditions)
    if (!c.holds) report.violated.push_back(c);
  report.evaluated.push_back(binding);
  for (TheoremEval& e : evals) report.evaluated.push_back(std::move(e));
  report.notes = std::move(notes);

  // Relaxation schedule: values must stay in [eps, delta-eps] (eps = 1e-3)
  // after the burn-in, which is sufficient for sum rho (delta - rho) = inf;
  // earlier values only need to stay inside [0, delta]. Theorems that pin
  // rho = 1 accept exactly that value.
  if (report.admissible) {
    constexpr double kEps = 1e-3;
    auto bad = [&](double r, bool after_burn_in) {
      if (report.pins_unit_rho) return r != 1.0;
      if (after_burn_in) return r < kEps || r > report.delta - kEps;
      return r < 0.0 || r > report.delta;
    };
    auto flag = [&](double r, int i) {
      report.admissible = false;
      Condition c;
      c.name = report.pins_unit_rho
                   ? "rho == 1"
                   : "rho in [1e-3, delta-1e-3] after burn-in";
      c.lhs = r;
      c.rhs = report.pins_unit_rho ? 1.0 : report.delta - kEps;
      c.strict = false;
      c.holds = false;
      report.violated.push_back(c);
      report.notes.push_back("rho schedule violates the admissible range at iteration " +
                             std::to_string(i));
    };
    if (cfg.rho.is_constant()) {
      const double r = cfg.rho.constant_value();
      if (bad(r, true)) flag(r, 0);
    } else {
      for (int i = 0; i < cfg.max_iter; ++i) {
        const double r = cfg.rho.at(i);
        if (bad(r, i >= cfg.rho_burn_in)) {
          flag(r, i);
          break;
        }
      }
    }
  }
  return report;
}

}  // namespace proxsplit
