#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "proxsplit/errors.hpp"
#include "proxsplit/vec.hpp"

namespace proxsplit {

// Live iterate of a splitting run: one primary block (x, s or z), dual
// blocks, and named auxiliary buffers. Block dimensions stay fixed over a
// run. Half-step values are exposed through StepResult::half; extra
// half-step quantities that are not state blocks (e.g. the primal estimate
// of an s-driven iteration) ride along in half.aux under names absent from
// the state layout.
struct IterState {
  Vec primary;
  std::vector<Vec> duals;
  std::map<std::string, Vec> aux;
  int iter = 0;
};

struct StepResult {
  IterState half;  // z^{(i+1/2)} in the layout of the input state (+ extras)
  IterState next;  // z^{(i+1)} after the relaxation update
};

// A step map produces both the half-step and the fully relaxed state; the
// driver stays a thin loop around it.
using StepMap = std::function<StepResult(const IterState&, double rho)>;

inline IterState relax_state(const IterState& z, const IterState& half, double rho) {
  IterState next;
  next.primary = relaxed(z.primary, half.primary, rho);
  next.duals.reserve(z.duals.size());
  for (std::size_t i = 0; i < z.duals.size(); ++i)
    next.duals.push_back(relaxed(z.duals[i], half.duals[i], rho));
  for (const auto& [name, block] : z.aux) {
    auto it = half.aux.find(name);
    if (it == half.aux.end())
      throw StructureError("relax_state: half state lacks aux block '" + name + "'");
    next.aux.emplace(name, relaxed(block, it->second, rho));
  }
  next.iter = z.iter;
  return next;
}

// ||half - z|| / (1 + ||z||) over the blocks of z's layout.
inline double state_residual(const IterState& z, const IterState& half) {
  double dd = 0.0, zz = 0.0;
  auto acc = [&dd, &zz](const Vec& a, const Vec& b) {
    if (a.dim() != b.dim()) throw DimensionError("state_residual", a.dim(), b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
      const double d = b[i] - a[i];
      dd += d * d;
      zz += a[i] * a[i];
    }
  };
  acc(z.primary, half.primary);
  if (z.duals.size() != half.duals.size())
    throw StructureError("state_residual: dual block count mismatch");
  for (std::size_t i = 0; i < z.duals.size(); ++i) acc(z.duals[i], half.duals[i]);
  for (const auto& [name, block] : z.aux) {
    auto it = half.aux.find(name);
    if (it == half.aux.end())
      throw StructureError("state_residual: half state lacks aux block '" + name + "'");
    acc(block, it->second);
  }
  return std::sqrt(dd) / (1.0 + std::sqrt(zz));
}

inline bool state_finite(const IterState& z) {
  if (!z.primary.all_finite()) return false;
  for (const Vec& u : z.duals)
    if (!u.all_finite()) return false;
  for (const auto& [name, block] : z.aux)
    if (!block.all_finite()) return false;
  return true;
}

inline const Vec& aux_block(const IterState& z, const std::string& name) {
  auto it = z.aux.find(name);
  if (it == z.aux.end())
    throw StructureError("aux_block: no block named '" + name + "'");
  return it->second;
}

}  // namespace proxsplit
