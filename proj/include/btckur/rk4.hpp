#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace btckur {

/// One classical fourth-order Runge-Kutta step for dy/dt = rhs(t, y).
/// State must support +, and scalar * (Eigen vectors/matrices, doubles).
template <class State, class Rhs>
State rk4_step(const State& y, double t, double h, Rhs&& rhs) {
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k1));
  const State k3 = rhs(t + 0.5 * h, State(y + (0.5 * h) * k2));
  const State k4 = rhs(t + h, State(y + h * k3));
  return State(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Uniform grid t_k = k * h on [0, tau] with h <= dt the largest spacing that divides tau.
/// Largest step <= raw_dt that divides `unit` evenly (unit / ceil(unit / raw_dt)),
/// so that all multiples of `unit` are grid nodes.
inline double nice_step(double raw_dt, double unit = 1e-3) {
  if (!(raw_dt > 0.0) || !(unit > 0.0)) throw std::invalid_argument("nice_step: steps must be positive");
  return unit / std::ceil(unit / raw_dt * (1.0 - 1e-12));
}

struct TimeGrid {
  double h = 0.0;
  int steps = 0;

  double t(int k) const { return k * h; }
  int nodes() const { return steps + 1; }
  double tau() const { return steps * h; }

  static TimeGrid make(double tau, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be positive");
    if (!(tau >= 0.0)) throw std::invalid_argument("TimeGrid: tau must be non-negative");
    if (tau == 0.0) return {dt, 0};
    if (dt > tau * (1.0 + 1e-12)) throw std::invalid_argument("TimeGrid: dt exceeds tau");
    const int steps = static_cast<int>(std::ceil(tau / dt - 1e-9));
    return {tau / steps, steps};
  }

  std::vector<double> times() const {
    std::vector<double> out(nodes());
    for (int k = 0; k < nodes(); ++k) out[k] = t(k);
    return out;
  }

  /// Grid index of time t; throws unless t lies on a node (relative slack 1e-9).
  int index_of(double time) const {
    const double x = time / h;
    const long k = std::lround(x);
    if (k < 0 || k > steps || std::abs(x - k) > 1e-9 * std::max(1.0, std::abs(x)))
      throw std::invalid_argument("TimeGrid: time " + std::to_string(time) + " is not a grid node");
    return static_cast<int>(k);
  }
};

}  // namespace btckur
