#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "iekf/errors.hpp"

namespace iekf {

/// Time-indexed input u(t).
using InputSignal = std::function<Eigen::VectorXd(double)>;

inline InputSignal constant_input(Eigen::VectorXd u) {
  return [u = std::move(u)](double) { return u; };
}

/// Number of fixed steps of size dt covering span. The span must be an
/// integer multiple of dt (relative slack 1e-9).
inline int step_count(double span, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("step size must be positive");
  if (span < 0.0) throw InvalidArgument("time span must be non-negative");
  const double n = span / dt;
  const double r = std::round(n);
  if (std::abs(n - r) > 1e-9 * std::max(1.0, n)) {
    throw InvalidArgument("time span " + std::to_string(span) + " is not a multiple of dt " + std::to_string(dt));
  }
  return static_cast<int>(r);
}

/// One classical RK4 step of dx/dt = f(t, x).
template <class State, class F>
State rk4_step(const State& x, double t, double dt, F&& f) {
  const State k1 = f(t, x);
  const State k2 = f(t + 0.5 * dt, State(x + 0.5 * dt * k1));
  const State k3 = f(t + 0.5 * dt, State(x + 0.5 * dt * k2));
  const State k4 = f(t + dt, State(x + dt * k3));
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace iekf
