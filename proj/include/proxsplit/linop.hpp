#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "proxsplit/errors.hpp"
#include "proxsplit/vec.hpp"

namespace proxsplit {

enum class OpKind { Identity, Dense, Diff1D, Stacked, ScaledSum, Custom };

// Bounded linear operator between dense spaces: forward map, adjoint map,
// and an optional certified upper bound on the operator norm. Values are
// immutable; with_norm_bound returns a copy carrying the bound.
class LinOp {
 public:
  using Fn = std::function<Vec(const Vec&)>;

  LinOp() = default;

  static LinOp identity(std::size_t n) {
    auto id = [](const Vec& x) { return x; };
    return LinOp(OpKind::Identity, n, n, id, id, 1.0, "identity");
  }

  // Row-major dense matrix.
  static LinOp dense(std::size_t rows, std::size_t cols, std::vector<double> a,
                     std::string label = "dense") {
    if (a.size() != rows * cols)
      throw DimensionError("LinOp::dense", rows * cols, a.size());
    auto data = std::make_shared<const std::vector<double>>(std::move(a));
    auto apply = [rows, cols, data](const Vec& x) {
      std::vector<double> r(rows, 0.0);
      for (std::size_t i = 0; i < rows; ++i) {
        double s = 0.0;
        const double* row = data->data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) s += row[j] * x[j];
        r[i] = s;
      }
      return Vec::raw(std::move(r));
    };
    auto adj = [rows, cols, data](const Vec& u) {
      std::vector<double> r(cols, 0.0);
      for (std::size_t i = 0; i < rows; ++i) {
        const double* row = data->data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) r[j] += row[j] * u[i];
      }
      return Vec::raw(std::move(r));
    };
    LinOp op(OpKind::Dense, cols, rows, apply, adj, std::nullopt, std::move(label));
    op.impl_->dense_data = data;
    return op;
  }

  static LinOp diag(std::vector<double> d, std::string label = "diag") {
    const std::size_t n = d.size();
    std::vector<double> a(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] = d[i];
    return dense(n, n, std::move(a), std::move(label));
  }

  // Forward differences x -> (x_2-x_1, ..., x_n-x_{n-1}), R^n -> R^{n-1}.
  static LinOp diff1d(std::size_t n) {
    if (n < 2) throw ContractViolation("LinOp::diff1d: need n >= 2");
    auto apply = [n](const Vec& x) {
      std::vector<double> r(n - 1);
      for (std::size_t i = 0; i + 1 < n; ++i) r[i] = x[i + 1] - x[i];
      return Vec::raw(std::move(r));
    };
    // Negative divergence: (-u_1, u_1-u_2, ..., u_{n-1}).
    auto adj = [n](const Vec& u) {
      std::vector<double> r(n, 0.0);
      r[0] = -u[0];
      for (std::size_t i = 1; i + 1 < n; ++i) r[i] = u[i - 1] - u[i];
      r[n - 1] = u[n - 2];
      return Vec::raw(std::move(r));
    };
    return LinOp(OpKind::Diff1D, n, n - 1, apply, adj, std::nullopt, "diff1d");
  }

  // x -> (L_1 x, ..., L_M x) with the weighted product-space inner product;
  // the adjoint is u -> sum_m w_m L_m^* u_m.
  static LinOp stacked(std::vector<LinOp> parts, std::vector<double> weights) {
    if (parts.empty()) throw ContractViolation("LinOp::stacked: empty part list");
    if (parts.size() != weights.size())
      throw StructureError("LinOp::stacked: one weight per part required");
    for (double w : weights)
      if (!(w > 0.0)) throw StructureError("LinOp::stacked: weights must be positive");
    const std::size_t in = parts.front().in_dim();
    std::size_t out = 0;
    std::vector<std::size_t> out_dims;
    for (const LinOp& p : parts) {
      if (p.in_dim() != in) throw DimensionError("LinOp::stacked", in, p.in_dim());
      out_dims.push_back(p.out_dim());
      out += p.out_dim();
    }
    auto ps = std::make_shared<const std::vector<LinOp>>(std::move(parts));
    auto ws = std::make_shared<const std::vector<double>>(std::move(weights));
    auto apply = [ps](const Vec& x) {
      std::vector<Vec> blocks;
      blocks.reserve(ps->size());
      for (const LinOp& p : *ps) blocks.push_back(p.apply(x));
      return concat(blocks);
    };
    auto adj = [ps, ws, out_dims](const Vec& u) {
      std::vector<Vec> blocks = split(u, out_dims);
      std::vector<Vec> terms;
      terms.reserve(ps->size());
      for (std::size_t m = 0; m < ps->size(); ++m)
        terms.push_back((*ws)[m] * (*ps)[m].adjoint((blocks)[m]));
      return sum_ordered(terms);
    };
    LinOp op(OpKind::Stacked, in, out, apply, adj, std::nullopt, "stacked");
    op.impl_->parts = ps;
    op.impl_->weights = ws;
    return op;
  }

  // sum_j coeffs[j] * parts[j]; all parts must share in/out dimensions.
  static LinOp scaled_sum(std::vector<double> coeffs, std::vector<LinOp> parts,
                          std::string label = "scaled_sum") {
    if (parts.empty() || parts.size() != coeffs.size())
      throw StructureError("LinOp::scaled_sum: one coefficient per part required");
    const std::size_t in = parts.front().in_dim();
    const std::size_t out = parts.front().out_dim();
    for (const LinOp& p : parts) {
      if (p.in_dim() != in) throw DimensionError("LinOp::scaled_sum", in, p.in_dim());
      if (p.out_dim() != out) throw DimensionError("LinOp::scaled_sum", out, p.out_dim());
    }
    auto ps = std::make_shared<const std::vector<LinOp>>(std::move(parts));
    auto cs = std::make_shared<const std::vector<double>>(std::move(coeffs));
    auto apply = [ps, cs](const Vec& x) {
      std::vector<Vec> terms;
      terms.reserve(ps->size());
      for (std::size_t j = 0; j < ps->size(); ++j)
        terms.push_back((*cs)[j] * (*ps)[j].apply(x));
      return sum_ordered(terms);
    };
    auto adj = [ps, cs](const Vec& u) {
      std::vector<Vec> terms;
      terms.reserve(ps->size());
      for (std::size_t j = 0; j < ps->size(); ++j)
        terms.push_back((*cs)[j] * (*ps)[j].adjoint(u));
      return sum_ordered(terms);
    };
    return LinOp(OpKind::ScaledSum, in, out, apply, adj, std::nullopt, std::move(label));
  }

  static LinOp custom(std::size_t in_dim, std::size_t out_dim, Fn apply, Fn adjoint,
                      std::optional<double> norm_bound = std::nullopt,
                      std::string label = "custom") {
    return LinOp(OpKind::Custom, in_dim, out_dim, std::move(apply), std::move(adjoint),
                 norm_bound, std::move(label));
  }

  static LinOp zero(std::size_t in_dim, std::size_t out_dim) {
    auto apply = [out_dim](const Vec&) { return Vec(out_dim); };
    auto adj = [in_dim](const Vec&) { return Vec(in_dim); };
    return LinOp(OpKind::Custom, in_dim, out_dim, apply, adj, 0.0, "zero");
  }

  Vec apply(const Vec& x) const {
    require();
    if (x.dim() != impl_->in)
      throw DimensionError("LinOp::apply(" + impl_->label + ")", impl_->in, x.dim());
    return impl_->apply(x);
  }

  Vec adjoint(const Vec& u) const {
    require();
    if (u.dim() != impl_->out)
      throw DimensionError("LinOp::adjoint(" + impl_->label + ")", impl_->out, u.dim());
    return impl_->adjoint(u);
  }

  std::size_t in_dim() const { require(); return impl_->in; }
  std::size_t out_dim() const { require(); return impl_->out; }
  OpKind kind() const { require(); return impl_->kind; }
  const std::string& label() const { require(); return impl_->label; }
  std::optional<double> norm_bound() const { require(); return impl_->norm_bound; }

  double require_norm_bound() const {
    require();
    if (!impl_->norm_bound) throw MissingNormBound(impl_->label);
    return *impl_->norm_bound;
  }

  LinOp with_norm_bound(double b) const {
    require();
    LinOp copy = *this;
    auto impl = std::make_shared<Impl>(*impl_);
    impl->norm_bound = b;
    copy.impl_ = std::move(impl);
    return copy;
  }

  LinOp with_label(std::string label) const {
    require();
    LinOp copy = *this;
    auto impl = std::make_shared<Impl>(*impl_);
    impl->label = std::move(label);
    copy.impl_ = std::move(impl);
    return copy;
  }

  // Dense payload when the operator was built from an explicit matrix.
  std::shared_ptr<const std::vector<double>> dense_data() const {
    require();
    return impl_->dense_data;
  }
  const std::vector<LinOp>* parts() const {
    require();
    return impl_->parts ? impl_->parts.get() : nullptr;
  }
  const std::vector<double>* part_weights() const {
    require();
    return impl_->weights ? impl_->weights.get() : nullptr;
  }

  bool valid() const { return impl_ != nullptr; }

 private:
  struct Impl {
    OpKind kind = OpKind::Custom;
    std::size_t in = 0, out = 0;
    Fn apply, adjoint;
    std::optional<double> norm_bound;
    std::string label;
    std::shared_ptr<const std::vector<double>> dense_data;
    std::shared_ptr<const std::vector<LinOp>> parts;
    std::shared_ptr<const std::vector<double>> weights;
  };

  LinOp(OpKind kind, std::size_t in, std::size_t out, Fn apply, Fn adjoint,
        std::optional<double> norm_bound, std::string label) {
    auto impl = std::make_shared<Impl>();
    impl->kind = kind;
    impl->in = in;
    impl->out = out;
    impl->apply = std::move(apply);
    impl->adjoint = std::move(adjoint);
    impl->norm_bound = norm_bound;
    impl->label = std::move(label);
    impl_ = std::move(impl);
  }

  void require() const {
    if (!impl_) throw ContractViolation("LinOp: empty operator");
  }

  std::shared_ptr<Impl> impl_;
};

// L*L as a self-adjoint operator on the input space.
inline LinOp gram(const LinOp& L) {
  LinOp copy = L;
  auto apply = [copy](const Vec& x) { return copy.adjoint(copy.apply(x)); };
  std::optional<double> b;
  if (copy.norm_bound()) b = (*copy.norm_bound()) * (*copy.norm_bound());
  return LinOp::custom(L.in_dim(), L.in_dim(), apply, apply, b,
                       "gram(" + L.label() + ")");
}

// L L* on the output space.
inline LinOp cogram(const LinOp& L) {
  LinOp copy = L;
  auto apply = [copy](const Vec& u) { return copy.apply(copy.adjoint(u)); };
  std::optional<double> b;
  if (copy.norm_bound()) b = (*copy.norm_bound()) * (*copy.norm_bound());
  return LinOp::custom(L.out_dim(), L.out_dim(), apply, apply, b,
                       "cogram(" + L.label() + ")");
}

// Largest singular value of op, estimated by power iteration on L*L from a
// deterministic seeded start (all-ones plus uniform noise, which cannot be
// orthogonal to the top eigenvector except on a null set). The estimate is
// inflated by (1+tol) before being reported, so that step-size conditions
// checked against it err on the safe side.
inline double estimate_norm(const LinOp& op, double tol = 1e-6,
                            int max_iter = 200000, std::uint64_t seed = 12345) {
  if (!(tol > 0.0)) throw ContractViolation("estimate_norm: tol must be positive");
  if (op.in_dim() == 0 || op.out_dim() == 0)
    throw ContractViolation("estimate_norm: operator has empty dimension");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> v0(op.in_dim());
  for (double& x : v0) x = 1.0 + 0.1 * unif(rng);
  Vec v = Vec::raw(std::move(v0));
  v *= 1.0 / norm(v);

  double lam = 0.0, lam_prev = -1.0;
  for (int k = 0; k < max_iter; ++k) {
    Vec w = op.adjoint(op.apply(v));
    lam = dot(v, w);
    const double nw = norm(w);
    if (nw == 0.0) return 0.0;  // operator annihilates the iterate: norm 0
    v = (1.0 / nw) * w;
    if (k > 0 && std::abs(lam - lam_prev) <= 1e-13 * std::max(std::abs(lam), 1e-30))
      return std::sqrt(std::max(lam, 0.0)) * (1.0 + tol);
    lam_prev = lam;
  }
  throw NormEstimationError(lam, max_iter);
}

// Convenience: copy of op carrying the freshly estimated norm bound.
inline LinOp certified(const LinOp& op, double tol = 1e-6, int max_iter = 200000,
                       std::uint64_t seed = 12345) {
  return op.with_norm_bound(estimate_norm(op, tol, max_iter, seed));
}

}  // namespace proxsplit
