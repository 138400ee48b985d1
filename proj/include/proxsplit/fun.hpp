#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "proxsplit/detail/dense.hpp"
#include "proxsplit/errors.hpp"
#include "proxsplit/linop.hpp"
#include "proxsplit/vec.hpp"

namespace proxsplit {

enum class FunKind { Zero, Quadratic, L1, SquaredL2, AffineIndicator, Box, LinearTerm, Custom };

struct SmoothInfo {
  double lipschitz = 0.0;  // gradient Lipschitz constant
  bool is_quadratic = false;
};

struct ProxResult {
  Vec point;
  std::optional<double> objective_at_point;
};

// Closed convex function given by kind. Proximity operators are exact
// closed forms (or a linear solve for the quadratic kind). Values are
// immutable and safe to share across threads; a Custom prox callable must
// be declared thread-safe by the caller before parallel block evaluation
// is allowed.
class Fun {
 public:
  using ProxFn = std::function<Vec(double, const Vec&)>;
  using ValueFn = std::function<double(const Vec&)>;

  Fun() : Fun(FunKind::Zero) {}

  static Fun zero() { return Fun(FunKind::Zero); }

  static Fun l1(double weight) {
    if (!(weight > 0.0)) throw ContractViolation("Fun::l1: weight must be positive");
    Fun f(FunKind::L1);
    f.impl_->weight = weight;
    return f;
  }

  // (weight/2) ||x||^2
  static Fun squared_l2(double weight) {
    if (!(weight > 0.0)) throw ContractViolation("Fun::squared_l2: weight must be positive");
    Fun f(FunKind::SquaredL2);
    f.impl_->weight = weight;
    return f;
  }

  static Fun linear(Vec c) {
    Fun f(FunKind::LinearTerm);
    f.impl_->dim = c.dim();
    f.impl_->c = std::move(c);
    return f;
  }

  // Indicator of {x : lo <= x <= hi} componentwise; bounds may be +-inf.
  static Fun box(std::vector<double> lo, std::vector<double> hi) {
    if (lo.size() != hi.size()) throw DimensionError("Fun::box", lo.size(), hi.size());
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (std::isnan(lo[i]) || std::isnan(hi[i]))
        throw ContractViolation("Fun::box: NaN bound");
      if (lo[i] > hi[i])
        throw ContractViolation("Fun::box: lo > hi at coordinate " + std::to_string(i));
    }
    Fun f(FunKind::Box);
    f.impl_->dim = lo.size();
    f.impl_->lo = Vec::raw(std::move(lo));
    f.impl_->hi = Vec::raw(std::move(hi));
    return f;
  }

  // Indicator of the affine set {x : Ax = y}. The normal-equation factor
  // A A^T is formed and factorized once here; a singular factor means the
  // rows of A are dependent and the projection formula is unusable.
  static Fun affine_indicator(LinOp A, Vec y) {
    if (A.out_dim() != y.dim()) throw DimensionError("Fun::affine_indicator", A.out_dim(), y.dim());
    Fun f(FunKind::AffineIndicator);
    f.impl_->dim = A.in_dim();
    f.impl_->op = A;
    f.impl_->c = std::move(y);
    f.impl_->a_dense = std::make_shared<detail::Matrix>(detail::materialize(A));
    auto llt = std::make_shared<Eigen::LLT<detail::Matrix>>(
        (*f.impl_->a_dense) * f.impl_->a_dense->transpose());
    if (llt->info() != Eigen::Success)
      throw SingularSystemError("Fun::affine_indicator: A A^T is singular");
    f.impl_->aat_llt = llt;
    return f;
  }

  // (1/2)<x,Qx> + <c,x> + t with Q symmetric positive semidefinite. Q is
  // materialized for the prox linear solves and verified on construction:
  // symmetry and smallest eigenvalue >= -1e-10. The Lipschitz constant is
  // the certified norm bound of Q (estimated here when absent).
  static Fun quadratic(LinOp Q, Vec c, double t = 0.0) {
    if (Q.in_dim() != Q.out_dim() || Q.in_dim() != c.dim())
      throw DimensionError("Fun::quadratic", Q.in_dim(), c.dim());
    Fun f(FunKind::Quadratic);
    f.impl_->dim = c.dim();
    f.impl_->op = Q;
    f.impl_->c = std::move(c);
    f.impl_->t = t;
    auto qd = std::make_shared<detail::Matrix>(detail::materialize(Q));
    if (!detail::is_symmetric(*qd))
      throw ContractViolation("Fun::quadratic: Q is not symmetric");
    if (detail::min_eigenvalue_sym(*qd) < -1e-10)
      throw ContractViolation("Fun::quadratic: Q has a negative eigenvalue");
    f.impl_->a_dense = qd;
    f.impl_->weight = Q.norm_bound() ? *Q.norm_bound() : estimate_norm(Q);
    return f;
  }

  static Fun custom(ProxFn prox, std::size_t dim = 0, ValueFn value = nullptr,
                    ProxFn conjugate_prox = nullptr, bool thread_safe = false,
                    std::string label = "custom") {
    Fun f(FunKind::Custom);
    f.impl_->dim = dim;
    f.impl_->prox_fn = std::move(prox);
    f.impl_->value_fn = std::move(value);
    f.impl_->conj_prox_fn = std::move(conjugate_prox);
    f.impl_->thread_safe = thread_safe;
    f.impl_->label = std::move(label);
    return f;
  }

  using GradFn = std::function<Vec(const Vec&)>;

  // Custom function that is differentiable everywhere (used for lifted
  // smooth terms); prox is optional.
  static Fun custom_smooth(GradFn gradient, SmoothInfo info, std::size_t dim,
                           ValueFn value = nullptr, ProxFn prox = nullptr,
                           bool thread_safe = false, std::string label = "custom") {
    Fun f = custom(std::move(prox), dim, std::move(value), nullptr, thread_safe,
                   std::move(label));
    f.impl_->grad_fn = std::move(gradient);
    f.impl_->custom_smooth = info;
    return f;
  }

  FunKind kind() const { return impl_->kind; }
  // 0 means dimension-generic (l1, squared l2, zero).
  std::size_t dim() const { return impl_->dim; }
  double weight() const { return impl_->weight; }
  const Vec& linear_part() const { return impl_->c; }
  double constant_part() const { return impl_->t; }
  const Vec& box_lo() const { return impl_->lo; }
  const Vec& box_hi() const { return impl_->hi; }
  const LinOp& op() const { return impl_->op; }
  bool thread_safe() const { return impl_->kind != FunKind::Custom || impl_->thread_safe; }
  const std::string& label() const { return impl_->label; }

  std::optional<SmoothInfo> smooth_info() const {
    switch (impl_->kind) {
      case FunKind::Zero:
      case FunKind::LinearTerm:
        return SmoothInfo{0.0, true};
      case FunKind::SquaredL2:
      case FunKind::Quadratic:
        return SmoothInfo{impl_->weight, true};
      case FunKind::Custom:
        return impl_->custom_smooth;
      default:
        return std::nullopt;
    }
  }

  bool is_quadratic_kind() const {
    auto s = smooth_info();
    return s && s->is_quadratic;
  }

  // Q as an operator, for quadratic kinds; dimension-generic kinds need a hint.
  LinOp quadratic_op(std::size_t dim_hint) const {
    const std::size_t n = impl_->dim ? impl_->dim : dim_hint;
    switch (impl_->kind) {
      case FunKind::Zero:
      case FunKind::LinearTerm:
        return LinOp::zero(n, n);
      case FunKind::SquaredL2: {
        const double w = impl_->weight;
        auto scale = [w](const Vec& x) { return w * x; };
        return LinOp::custom(n, n, scale, scale, w, "scaled-identity");
      }
      case FunKind::Quadratic:
        return impl_->op;
      default:
        throw ContractViolation("Fun::quadratic_op: not a quadratic kind");
    }
  }

  Vec quadratic_lin(std::size_t dim_hint) const {
    const std::size_t n = impl_->dim ? impl_->dim : dim_hint;
    switch (impl_->kind) {
      case FunKind::Zero:
      case FunKind::SquaredL2:
        return Vec(n);
      case FunKind::LinearTerm:
      case FunKind::Quadratic:
        return impl_->c;
      default:
        throw ContractViolation("Fun::quadratic_lin: not a quadratic kind");
    }
  }

  bool has_conjugate_prox_override() const {
    return impl_->kind == FunKind::Custom && impl_->conj_prox_fn != nullptr;
  }

  friend ProxResult prox(const Fun& f, double tau, const Vec& x);
  friend ProxResult prox_conjugate(const Fun& f, double tau, const Vec& x);
  friend Vec prox_in_metric(const Fun& f, const Vec& p_diag, const Vec& v);
  friend Vec grad(const Fun& h, const Vec& x);
  friend std::optional<double> try_value(const Fun& f, const Vec& x);
  friend double conjugate_value(const Fun& f, const Vec& u);

 private:
  struct Impl {
    FunKind kind = FunKind::Zero;
    std::size_t dim = 0;
    double weight = 0.0;
    double t = 0.0;
    Vec c, lo, hi;
    LinOp op;
    std::shared_ptr<detail::Matrix> a_dense;
    std::shared_ptr<Eigen::LLT<detail::Matrix>> aat_llt;
    ProxFn prox_fn, conj_prox_fn;
    ValueFn value_fn;
    GradFn grad_fn;
    std::optional<SmoothInfo> custom_smooth;
    bool thread_safe = false;
    std::string label;
  };

  explicit Fun(FunKind k) : impl_(std::make_shared<Impl>()) { impl_->kind = k; }

  void check_dim(const Vec& x, const char* where) const {
    if (impl_->dim != 0 && x.dim() != impl_->dim)
      throw DimensionError(where, impl_->dim, x.dim());
  }

  std::shared_ptr<Impl> impl_;
};

namespace detail {
inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}
}  // namespace detail

inline std::optional<double> try_value(const Fun& f, const Vec& x) {
  f.check_dim(x, "value");
  const auto& im = *f.impl_;
  switch (im.kind) {
    case FunKind::Zero:
      return 0.0;
    case FunKind::L1: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.dim(); ++i) s += std::abs(x[i]);
      return im.weight * s;
    }
    case FunKind::SquaredL2:
      return 0.5 * im.weight * norm_sq(x);
    case FunKind::LinearTerm:
      return dot(im.c, x);
    case FunKind::Quadratic: {
      Vec qx = im.op.apply(x);
      return 0.5 * dot(x, qx) + dot(im.c, x) + im.t;
    }
    // Indicator kinds contribute zero to reported objective values;
    // feasibility shows up through the iteration itself.
    case FunKind::AffineIndicator:
    case FunKind::Box:
      return 0.0;
    case FunKind::Custom:
      if (im.value_fn) return im.value_fn(x);
      return std::nullopt;
  }
  return std::nullopt;
}

inline double value(const Fun& f, const Vec& x) {
  auto v = try_value(f, x);
  if (!v) throw ContractViolation("value: function has no value callable");
  return *v;
}

// argmin_p { f(p) + (1/(2 tau)) ||x - p||^2 }, exact per kind.
inline ProxResult prox(const Fun& f, double tau, const Vec& x) {
  if (!(tau > 0.0)) throw ContractViolation("prox: tau must be positive");
  f.check_dim(x, "prox");
  const auto& im = *f.impl_;
  Vec p;
  switch (im.kind) {
    case FunKind::Zero:
      p = x;
      break;
    case FunKind::L1: {
      const double t = tau * im.weight;
      std::vector<double> r(x.dim());
      for (std::size_t i = 0; i < x.dim(); ++i) r[i] = detail::soft_threshold(x[i], t);
      p = Vec::raw(std::move(r));
      break;
    }
    case FunKind::SquaredL2:
      p = (1.0 / (1.0 + tau * im.weight)) * x;
      break;
    case FunKind::LinearTerm:
      p = axpy(-tau, im.c, x);
      break;
    case FunKind::Box: {
      std::vector<double> r(x.dim());
      for (std::size_t i = 0; i < x.dim(); ++i)
        r[i] = std::min(std::max(x[i], im.lo[i]), im.hi[i]);
      p = Vec::raw(std::move(r));
      break;
    }
    case FunKind::AffineIndicator: {
      // Euclidean projection: x - A^T (A A^T)^{-1} (A x - y).
      detail::EVec ax = (*im.a_dense) * detail::to_eigen(x) - detail::to_eigen(im.c);
      detail::EVec z = im.aat_llt->solve(ax);
      detail::EVec r = detail::to_eigen(x) - im.a_dense->transpose() * z;
      p = detail::from_eigen(r);
      break;
    }
    case FunKind::Quadratic: {
      // (tau Q + Id) p = x - tau c, Cholesky with CG fallback.
      detail::Matrix m = tau * (*im.a_dense);
      m.diagonal().array() += 1.0;
      Vec rhs = axpy(-tau, im.c, x);
      Eigen::LLT<detail::Matrix> llt(m);
      if (llt.info() == Eigen::Success) {
        p = detail::from_eigen(llt.solve(detail::to_eigen(rhs)));
      } else {
        const LinOp& q = im.op;
        auto apply = [&q, tau](const Vec& v) { return axpy(tau, q.apply(v), v); };
        p = detail::conjugate_gradient(apply, rhs);
      }
      break;
    }
    case FunKind::Custom:
      if (!im.prox_fn) throw ContractViolation("prox: custom function has no prox callable");
      p = im.prox_fn(tau, x);
      break;
  }
  ProxResult r{std::move(p), std::nullopt};
  r.objective_at_point = try_value(f, r.point);
  return r;
}

// prox of tau * f^*, always through the Moreau identity
//   prox_{tau f^*}(x) = x - tau * prox_{f/tau... } -- concretely
//   prox_{tau f^*}(x) = x - tau * prox_{(1/tau) f}(x / tau),
// so no dual formula is ever hand-coded. Custom functions may carry an
// explicit conjugate prox; that path exists for the product-space lifting,
// whose conjugate lives in a weighted metric.
inline ProxResult prox_conjugate(const Fun& f, double tau, const Vec& x) {
  if (!(tau > 0.0)) throw ContractViolation("prox_conjugate: tau must be positive");
  if (f.has_conjugate_prox_override()) {
    Vec p = f.impl_->conj_prox_fn(tau, x);
    return ProxResult{std::move(p), std::nullopt};
  }
  ProxResult inner = prox(f, 1.0 / tau, (1.0 / tau) * x);
  Vec p = axpy(-tau, inner.point, x);
  return ProxResult{std::move(p), std::nullopt};
}

inline Vec grad(const Fun& h, const Vec& x) {
  if (!h.smooth_info())
    throw ContractViolation("grad: function kind is not differentiable everywhere");
  h.check_dim(x, "grad");
  const auto& im = *h.impl_;
  switch (im.kind) {
    case FunKind::Zero:
      return Vec(x.dim());
    case FunKind::LinearTerm:
      return im.c;
    case FunKind::SquaredL2:
      return im.weight * x;
    case FunKind::Quadratic:
      return im.op.apply(x) + im.c;
    case FunKind::Custom:
      if (!im.grad_fn) throw ContractViolation("grad: custom function has no gradient");
      return im.grad_fn(x);
    default:
      throw ContractViolation("grad: unreachable");
  }
}

// Resolvent in a diagonal metric P = diag(p): argmin f(z) + (1/2)||z - v||_P^2.
// Supports the kinds whose metric prox stays a closed form or linear solve.
inline Vec prox_in_metric(const Fun& f, const Vec& p_diag, const Vec& v) {
  for (std::size_t i = 0; i < p_diag.dim(); ++i)
    if (!(p_diag[i] > 0.0))
      throw ContractViolation("prox_in_metric: metric diagonal must be positive");
  f.check_dim(v, "prox_in_metric");
  const auto& im = *f.impl_;
  switch (im.kind) {
    case FunKind::Zero:
      return v;
    case FunKind::L1: {
      std::vector<double> r(v.dim());
      for (std::size_t i = 0; i < v.dim(); ++i)
        r[i] = detail::soft_threshold(v[i], im.weight / p_diag[i]);
      return Vec::raw(std::move(r));
    }
    case FunKind::SquaredL2: {
      std::vector<double> r(v.dim());
      for (std::size_t i = 0; i < v.dim(); ++i)
        r[i] = v[i] * p_diag[i] / (p_diag[i] + im.weight);
      return Vec::raw(std::move(r));
    }
    case FunKind::LinearTerm: {
      std::vector<double> r(v.dim());
      for (std::size_t i = 0; i < v.dim(); ++i) r[i] = v[i] - im.c[i] / p_diag[i];
      return Vec::raw(std::move(r));
    }
    case FunKind::Box: {
      std::vector<double> r(v.dim());
      for (std::size_t i = 0; i < v.dim(); ++i)
        r[i] = std::min(std::max(v[i], im.lo[i]), im.hi[i]);
      return Vec::raw(std::move(r));
    }
    case FunKind::Quadratic: {
      // (Q + P) z = P v - c
      detail::Matrix m = *im.a_dense;
      for (std::size_t i = 0; i < p_diag.dim(); ++i)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += p_diag[i];
      std::vector<double> rhs(v.dim());
      for (std::size_t i = 0; i < v.dim(); ++i) rhs[i] = p_diag[i] * v[i] - im.c[i];
      return detail::solve_spd(m, Vec::raw(std::move(rhs)));
    }
    case FunKind::AffineIndicator: {
      // argmin ||z - v||_P^2 s.t. A z = y  =>  z = v - P^{-1} A^T (A P^{-1} A^T)^{-1} (A v - y)
      const detail::Matrix& a = *im.a_dense;
      detail::Matrix pinv_at = a.transpose();
      for (Eigen::Index i = 0; i < pinv_at.rows(); ++i)
        pinv_at.row(i) /= p_diag[static_cast<std::size_t>(i)];
      detail::Matrix apat = a * pinv_at;
      detail::EVec res = a * detail::to_eigen(v) - detail::to_eigen(im.c);
      Eigen::LLT<detail::Matrix> llt(apat);
      if (llt.info() != Eigen::Success)
        throw SingularSystemError("prox_in_metric: A P^{-1} A^T singular");
      detail::EVec z = detail::to_eigen(v) - pinv_at * llt.solve(res);
      return detail::from_eigen(z);
    }
    case FunKind::Custom:
      throw ContractViolation("prox_in_metric: unsupported for custom functions");
  }
  throw ContractViolation("prox_in_metric: unreachable");
}

// Value of the convex conjugate where it has a usable closed form.
// Indicator-style conjugates return +inf outside their domain.
inline double conjugate_value(const Fun& f, const Vec& u) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto& im = *f.impl_;
  switch (im.kind) {
    case FunKind::Zero:
      return norm(u) <= 1e-9 ? 0.0 : kInf;
    case FunKind::L1:
      return inf_norm(u) <= im.weight + 1e-9 ? 0.0 : kInf;
    case FunKind::SquaredL2:
      return 0.5 * norm_sq(u) / im.weight;
    case FunKind::LinearTerm:
      return norm(u - im.c) <= 1e-9 ? 0.0 : kInf;
    case FunKind::Box: {
      double s = 0.0;
      for (std::size_t i = 0; i < u.dim(); ++i)
        s += std::max(im.lo[i] * u[i], im.hi[i] * u[i]);
      return s;
    }
    case FunKind::Quadratic: {
      // (1/2) <u-c, Q^{-1}(u-c)> - t, requires Q positive definite.
      Vec rhs = u - im.c;
      Eigen::LLT<detail::Matrix> llt(*im.a_dense);
      if (llt.info() != Eigen::Success)
        throw ContractViolation("conjugate_value: Q not positive definite");
      detail::EVec z = llt.solve(detail::to_eigen(rhs));
      return 0.5 * detail::to_eigen(rhs).dot(z) - im.t;
    }
    default:
      throw ContractViolation("conjugate_value: no closed form for this kind");
  }
}

// f^* as a function object (prox via the Moreau identity on f).
inline Fun conjugate_of(const Fun& f) {
  Fun copy = f;
  auto prox_fn = [copy](double tau, const Vec& w) {
    return prox_conjugate(copy, tau, w).point;
  };
  auto value_fn = [copy](const Vec& w) { return conjugate_value(copy, w); };
  return Fun::custom(prox_fn, f.dim(), value_fn, nullptr, true,
                     "conjugate(" + std::string(f.label().empty() ? "f" : f.label()) + ")");
}

// u -> f^*(-u); prox_{tau g}(w) = -prox_{tau f^*}(-w).
inline Fun conjugate_negated(const Fun& f) {
  Fun copy = f;
  auto prox_fn = [copy](double tau, const Vec& w) {
    return -prox_conjugate(copy, tau, -w).point;
  };
  auto value_fn = [copy](const Vec& w) { return conjugate_value(copy, -w); };
  return Fun::custom(prox_fn, f.dim(), value_fn, nullptr, true, "conjugate-negated");
}

}  // namespace proxsplit
