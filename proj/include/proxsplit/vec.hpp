#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

#include "proxsplit/errors.hpp"

namespace proxsplit {

// Dense real vector with 64-bit entries. Dimension is fixed at creation;
// construction from user data rejects NaN/Inf. Arithmetic between vectors
// does not re-validate (transient overflow during an iteration is caught by
// the solver driver's finiteness check).
class Vec {
 public:
  Vec() = default;
  explicit Vec(std::size_t n, double fill = 0.0) : v_(n, fill) {
    if (!std::isfinite(fill)) throw ContractViolation("Vec: non-finite fill value");
  }
  Vec(std::initializer_list<double> xs) : v_(xs) { validate(); }

  static Vec of(std::vector<double> entries) {
    Vec r;
    r.v_ = std::move(entries);
    r.validate();
    return r;
  }
  // Internal fast path: adopt storage without the finiteness scan.
  static Vec raw(std::vector<double> entries) {
    Vec r;
    r.v_ = std::move(entries);
    return r;
  }

  std::size_t dim() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  double& operator[](std::size_t i) { return v_[i]; }
  const std::vector<double>& entries() const { return v_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  Vec& operator+=(const Vec& o) {
    check_same_dim(o, "Vec::operator+=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    check_same_dim(o, "Vec::operator-=");
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Vec& operator*=(double a) {
    for (double& x : v_) x *= a;
    return *this;
  }

 private:
  void validate() const {
    if (!all_finite()) throw ContractViolation("Vec: non-finite entry");
  }
  void check_same_dim(const Vec& o, const char* where) const {
    if (o.dim() != dim()) throw DimensionError(where, dim(), o.dim());
  }
  std::vector<double> v_;
};

inline Vec operator+(Vec a, const Vec& b) { a += b; return a; }
inline Vec operator-(Vec a, const Vec& b) { a -= b; return a; }
inline Vec operator*(double a, Vec x) { x *= a; return x; }
inline Vec operator-(Vec x) { x *= -1.0; return x; }

inline double dot(const Vec& a, const Vec& b) {
  if (a.dim() != b.dim()) throw DimensionError("dot", a.dim(), b.dim());
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm_sq(a)); }

inline double inf_norm(const Vec& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

// a*x + y
inline Vec axpy(double a, const Vec& x, const Vec& y) {
  if (x.dim() != y.dim()) throw DimensionError("axpy", y.dim(), x.dim());
  std::vector<double> r(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) r[i] = a * x[i] + y[i];
  return Vec::raw(std::move(r));
}

// a + rho*(b - a), the relaxation update applied blockwise everywhere.
inline Vec relaxed(const Vec& a, const Vec& b, double rho) {
  if (a.dim() != b.dim()) throw DimensionError("relaxed", a.dim(), b.dim());
  std::vector<double> r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] + rho * (b[i] - a[i]);
  return Vec::raw(std::move(r));
}

inline Vec concat(const std::vector<Vec>& parts) {
  std::size_t n = 0;
  for (const Vec& p : parts) n += p.dim();
  std::vector<double> r;
  r.reserve(n);
  for (const Vec& p : parts) r.insert(r.end(), p.begin(), p.end());
  return Vec::raw(std::move(r));
}

inline std::vector<Vec> split(const Vec& x, const std::vector<std::size_t>& dims) {
  std::size_t total = 0;
  for (std::size_t d : dims) total += d;
  if (total != x.dim()) throw DimensionError("split", total, x.dim());
  std::vector<Vec> parts;
  parts.reserve(dims.size());
  std::size_t at = 0;
  for (std::size_t d : dims) {
    std::vector<double> p(x.data() + at, x.data() + at + d);
    parts.push_back(Vec::raw(std::move(p)));
    at += d;
  }
  return parts;
}

// Sum of M same-dimension vectors, accumulated per coordinate in sorted
// value order. The result is invariant under permutation of the summands,
// which keeps block-permutation runs bit-identical.
inline Vec sum_ordered(const std::vector<Vec>& parts) {
  if (parts.empty()) throw ContractViolation("sum_ordered: empty list");
  const std::size_t n = parts.front().dim();
  for (const Vec& p : parts)
    if (p.dim() != n) throw DimensionError("sum_ordered", n, p.dim());
  if (parts.size() == 1) return parts.front();
  std::vector<double> r(n);
  std::vector<double> terms(parts.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < parts.size(); ++m) terms[m] = parts[m][i];
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    r[i] = s;
  }
  return Vec::raw(std::move(r));
}

// Sum_m weights[m] * parts[m], permutation-invariant like sum_ordered.
inline Vec weighted_sum_ordered(const std::vector<Vec>& parts,
                                const std::vector<double>& weights) {
  if (parts.size() != weights.size())
    throw StructureError("weighted_sum_ordered: weight count mismatch");
  std::vector<Vec> scaled;
  scaled.reserve(parts.size());
  for (std::size_t m = 0; m < parts.size(); ++m) scaled.push_back(weights[m] * parts[m]);
  return sum_ordered(scaled);
}

// Ordered list of blocks with strictly positive weights; the inner product
// is sum_m w_m <a_m, b_m>.
struct BlockVec {
  std::vector<Vec> blocks;
  std::vector<double> weights;

  BlockVec(std::vector<Vec> b, std::vector<double> w)
      : blocks(std::move(b)), weights(std::move(w)) {
    if (blocks.size() != weights.size())
      throw StructureError("BlockVec: one weight per block required");
    for (double wm : weights)
      if (!(wm > 0.0) || !std::isfinite(wm))
        throw StructureError("BlockVec: weights must be strictly positive");
  }
  std::size_t block_count() const { return blocks.size(); }
};

inline double weighted_inner(const BlockVec& a, const BlockVec& b) {
  if (a.block_count() != b.block_count())
    throw StructureError("weighted_inner: block count mismatch");
  double s = 0.0;
  for (std::size_t m = 0; m < a.block_count(); ++m) {
    if (a.weights[m] != b.weights[m])
      throw StructureError("weighted_inner: weight mismatch");
    if (a.blocks[m].dim() != b.blocks[m].dim())
      throw DimensionError("weighted_inner", a.blocks[m].dim(), b.blocks[m].dim());
    s += a.weights[m] * dot(a.blocks[m], b.blocks[m]);
  }
  return s;
}

inline double weighted_norm(const BlockVec& a) {
  return std::sqrt(weighted_inner(a, a));
}

}  // namespace proxsplit
