#pragma once

// Runge-Kutta-Munthe-Kaas helpers for ODEs on SE(3).
//
// A curve is written locally as H = H0 exp(u) (left-trivialized dynamics
// dH/dt = H v^) or H = exp(u) H0 (right-trivialized dynamics dH/dt = v^ H).
// The local coordinate u then obeys du/dt = dexp^{-1}(v); the series is
// truncated after the second commutator, which is what a fourth-order scheme
// requires.

#include <functional>

#include "centroidal_kit/spatial.hpp"

namespace ckit {

/// du/dt for H = H0 exp(u) and dH/dt = H v^.
inline SpatialMotion dexpinv_left(const SpatialMotion& u, const SpatialMotion& v) {
  const SpatialMotion uv = cross6(u, v);
  return v + 0.5 * uv + (1.0 / 12.0) * cross6(u, uv);
}

/// du/dt for H = exp(u) H0 and dH/dt = v^ H.
inline SpatialMotion dexpinv_right(const SpatialMotion& u, const SpatialMotion& v) {
  const SpatialMotion uv = cross6(u, v);
  return v - 0.5 * uv + (1.0 / 12.0) * cross6(u, uv);
}

/// One RKMK4 step of dH/dt = w(t, H)^ H (right-trivialized velocity field).
inline Transform rkmk4_step_right(const Transform& h, double t, double dt,
                                  const std::function<SpatialMotion(double, const Transform&)>& w) {
  const SpatialMotion k1 = w(t, h);
  const SpatialMotion u2 = 0.5 * dt * k1;
  const SpatialMotion k2 = dexpinv_right(u2, w(t + 0.5 * dt, exp_se3(u2) * h));
  const SpatialMotion u3 = 0.5 * dt * k2;
  const SpatialMotion k3 = dexpinv_right(u3, w(t + 0.5 * dt, exp_se3(u3) * h));
  const SpatialMotion u4 = dt * k3;
  const SpatialMotion k4 = dexpinv_right(u4, w(t + dt, exp_se3(u4) * h));
  return exp_se3((dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)) * h;
}

}  // namespace ckit
