#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "proxsplit/errors.hpp"
#include "proxsplit/state.hpp"

namespace proxsplit {

// Relaxation schedule rho^{(i)}: a constant or an arbitrary callable.
class RhoSchedule {
 public:
  RhoSchedule() : constant_(1.0) {}
  RhoSchedule(double c) : constant_(c) {}  // NOLINT: implicit by design
  explicit RhoSchedule(std::function<double(int)> fn) : fn_(std::move(fn)) {}

  double at(int i) const { return fn_ ? fn_(i) : constant_; }
  bool is_constant() const { return !fn_; }
  double constant_value() const { return constant_; }

 private:
  double constant_ = 1.0;
  std::function<double(int)> fn_;
};

// Stop once |objective(half) - target| <= tol; available only when an
// independent solution value is known (test mode).
struct GapStop {
  std::function<double(const IterState& half)> objective;
  double target = 0.0;
  double tol = 0.0;
};

struct DriveConfig {
  RhoSchedule rho{1.0};
  int max_iter = 1000;
  double stop_tol = 0.0;
  std::optional<GapStop> gap_stop;
};

struct DriveHooks {
  // Called after every full relaxed update with the pre-update state, the
  // step output, the iteration index, and the fixed-point residual.
  std::function<void(const IterState& state, const StepResult& step, int iter,
                     double residual)>
      on_step;
};

enum class StopReason { Tolerance, MaxIter, GapReached };

struct DriveResult {
  IterState state;
  StopReason reason = StopReason::MaxIter;
  int iterations = 0;
  double final_residual = 0.0;
};

// z^{(i+1)} = z^{(i)} + rho^{(i)} (T z^{(i)} - z^{(i)}), with the step map
// supplying both T z^{(i)} and the relaxed update. Stops on max_iter or on
// the relative fixed-point residual ||z^{(i+1/2)} - z^{(i)}|| / (1+||z^{(i)}||).
inline DriveResult relaxed_drive(const StepMap& step, IterState init,
                                 const DriveConfig& cfg, const DriveHooks& hooks = {}) {
  IterState state = std::move(init);
  double residual = 0.0;
  for (int i = 0; i < cfg.max_iter; ++i) {
    const double rho = cfg.rho.at(i);
    StepResult out = step(state, rho);
    residual = state_residual(state, out.half);
    if (!state_finite(out.next) || !state_finite(out.half)) throw DivergenceError(i);
    if (hooks.on_step) hooks.on_step(state, out, i, residual);
    const bool gap_hit =
        cfg.gap_stop &&
        std::abs(cfg.gap_stop->objective(out.half) - cfg.gap_stop->target) <=
            cfg.gap_stop->tol;
    state = std::move(out.next);
    state.iter = i + 1;
    if (residual <= cfg.stop_tol)
      return DriveResult{std::move(state), StopReason::Tolerance, i + 1, residual};
    if (gap_hit)
      return DriveResult{std::move(state), StopReason::GapReached, i + 1, residual};
  }
  return DriveResult{std::move(state), StopReason::MaxIter, cfg.max_iter, residual};
}

}  // namespace proxsplit
