#pragma once

// Total and centroidal momentum, locked and average velocities, and the
// centroidal frame obtained by integrating the locked velocity on SE(3).
//
// Frames:
//   A  inertial frame
//   B  base link frame
//   G  origin at the center of mass, orientation of A
//   N  origin at the center of mass, orientation of B
//   C  centroidal frame

#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "centroidal_kit/dynamics.hpp"
#include "centroidal_kit/trajectory.hpp"

namespace ckit {

enum class FrameTag { kA, kB, kG, kN, kC };

std::string_view to_string(FrameTag tag);

/// Momentum coordinates tagged with the frame they are expressed in.  Values
/// in different frames are not interchangeable; go through `express_in`.
class Momentum {
 public:
  Momentum(const Vec6& value, FrameTag frame) : value_(value), frame_(frame) {}

  const Vec6& value() const { return value_; }
  FrameTag frame() const { return frame_; }
  Vec3 linear() const { return value_.head<3>(); }
  Vec3 angular() const { return value_.tail<3>(); }
  SpatialForce as_force() const { return SpatialForce(value_); }

 private:
  Vec6 value_;
  FrameTag frame_;
};

/// ^A H_F for F in {A, B, G, N}.
Transform frame_pose(const Model& model, const State& state, FrameTag frame);

/// Re-expresses a momentum in another frame of the same configuration.
Momentum express_in(const Model& model, const State& state, const Momentum& j, FrameTag target);

/// _B J = L v + A sdot, then transformed to `frame` (A, B or G).
Momentum total_momentum(const Model& model, const State& state, const VelocityState& nu,
                        FrameTag frame);
/// Sum of per-link momenta M_L ^L v_L, transformed to `frame` link by link.
Momentum total_momentum_by_links(const Model& model, const State& state, const VelocityState& nu,
                                 FrameTag frame);

/// ^B v_loc = v + L^{-1} A sdot; frames B, A (right-trivialized) or N.
/// Throws NumericalError if L fails to factorize.
SpatialMotion locked_velocity(const Model& model, const State& state, const VelocityState& nu,
                              FrameTag frame);
/// ^G v_ave = ^G X_B ^B v_loc.
SpatialMotion average_velocity(const Model& model, const State& state, const VelocityState& nu);
/// ^G v_ave through the block-diagonal _G L_G: _G L_G^{-1} _G J.
SpatialMotion average_velocity_from_momentum(const Model& model, const State& state,
                                             const VelocityState& nu);

/// _F L_F = _F X^B L ^B X_F for F in {A, B, G, N}.
Mat6 locked_inertia_at(const Model& model, const State& state, FrameTag frame);

/// d/dt _A J under gravity and external wrenches; joint torques do not enter.
Vec6 momentum_rate(const Model& model, const State& state, const VelocityState& nu,
                   const VecX& tau, const std::vector<ExternalWrench>& wrenches);

/// <_A J, xi> and, independently, the fiber derivative of the Lagrangian
/// along the generator of xi: nu^T M (^B X_A xi; 0).
std::pair<double, double> momentum_map_pairing(const Model& model, const State& state,
                                               const VelocityState& nu, const SpatialMotion& xi);

struct MotionSample {
  State state;
  VelocityState velocity;
};
/// Configuration and velocity at time t.
using MotionSource = std::function<MotionSample(double)>;

/// Joints follow `shape`, the base stays at `base_pose` with zero velocity.
MotionSource shape_only_motion(const ShapeTrajectory& shape, const Transform& base_pose);

struct CentroidalSample {
  double t = 0.0;
  Transform pose;  // ^A H_C
};
using CentroidalTrajectory = std::vector<CentroidalSample>;

struct CentroidalOptions {
  double t0 = 0.0;
  double t_end = 1.0;
  double dt = 1e-3;
  /// Default: origin at the center of mass, orientation of the base, at t0.
  std::optional<Transform> initial;
  std::size_t stride = 1;
};

/// Default initial centroidal frame: origin ^A p_com, orientation ^A R_B.
Transform default_centroidal_initial(const Model& model, const State& state);

/// RKMK4 integration of ^A Hdot_C = (^A v_loc)^ ^A H_C.  Throws NumericalError
/// on a non-finite locked velocity.
CentroidalTrajectory integrate_centroidal_frame(const Model& model, const MotionSource& motion,
                                                const CentroidalOptions& options);

/// Dynamics simulation with the centroidal frame integrated alongside
/// (TrajectorySample::frame holds ^A H_C).
std::vector<TrajectorySample> simulate_with_centroidal_frame(
    const Model& model, const State& initial, const VelocityState& initial_velocity,
    SimulationOptions options, std::optional<Transform> frame_initial = std::nullopt);

/// Free-floating motion with prescribed joints: the base velocity follows from
/// a conserved total momentum _A J (no gravity, no external forces).  The
/// centroidal frame is integrated alongside in TrajectorySample::frame.
std::vector<TrajectorySample> prescribed_shape_motion(const Model& model,
                                                      const ShapeTrajectory& shape,
                                                      const Transform& base_pose,
                                                      const Vec6& momentum_a, double dt,
                                                      std::optional<Transform> frame_initial = std::nullopt);

/// max_t |^C p_com(t) - ^C p_com(t0)| along a centroidal trajectory.
double centroidal_com_drift(const Model& model, const MotionSource& motion,
                            const CentroidalTrajectory& trajectory);

}  // namespace ckit
