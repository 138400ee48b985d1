#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "proxsplit/errors.hpp"
#include "proxsplit/fun.hpp"
#include "proxsplit/linop.hpp"

namespace proxsplit {

struct Term {
  Fun g;
  LinOp L;
};

// Optional quadratic acting on the first dual block of the saddle problem
// solved by the extended primal-dual engine.
struct DualQuadratic {
  LinOp Q;
  Vec t;
};

// minimize f(x) + sum_m g_m(L_m x) + h(x), h smooth (possibly zero).
struct ProblemSpec {
  Fun f;
  std::vector<Term> terms;
  Fun h;
  std::size_t dim = 0;
  std::string description;
  std::optional<DualQuadratic> dual_quadratic;
};

inline ProblemSpec make_problem(Fun f, std::vector<Term> terms, Fun h, std::size_t dim,
                                std::string description = "") {
  if (dim == 0) throw ContractViolation("make_problem: dimension must be positive");
  if (f.dim() != 0 && f.dim() != dim)
    throw DimensionError("make_problem: f", dim, f.dim());
  if (!h.smooth_info())
    throw ContractViolation("make_problem: h must be smooth (or zero)");
  if (h.dim() != 0 && h.dim() != dim)
    throw DimensionError("make_problem: h", dim, h.dim());
  for (const Term& t : terms) {
    if (t.L.in_dim() != dim)
      throw DimensionError("make_problem: L_m input", dim, t.L.in_dim());
    if (t.g.dim() != 0 && t.g.dim() != t.L.out_dim())
      throw DimensionError("make_problem: g_m", t.L.out_dim(), t.g.dim());
  }
  return ProblemSpec{std::move(f), std::move(terms), std::move(h), dim,
                     std::move(description), std::nullopt};
}

// Full objective at x; indicator parts contribute zero (see try_value).
inline double objective(const ProblemSpec& p, const Vec& x) {
  double s = try_value(p.f, x).value_or(0.0);
  for (const Term& t : p.terms) s += try_value(t.g, t.L.apply(x)).value_or(0.0);
  s += try_value(p.h, x).value_or(0.0);
  return s;
}

// Lipschitz constant of grad h (0 when h is zero/linear).
inline double smooth_beta(const ProblemSpec& p) {
  auto s = p.h.smooth_info();
  if (!s) throw ContractViolation("smooth_beta: h is not smooth");
  return s->lipschitz;
}

}  // namespace proxsplit
