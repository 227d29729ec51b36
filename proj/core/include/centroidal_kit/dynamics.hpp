#pragma once

// Floating-base rigid-body dynamics in the left-trivialized velocity
// nu = (^B v_{A,B}, sdot):
//
//   M(s) nudot + C(q, nu) nu + G(q) = [0; tau] + sum_i J_i^T f_i
//
// Generalized vectors are Eigen::VectorXd of size 6 + n_J, base block first.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "centroidal_kit/kinematics.hpp"
#include "centroidal_kit/model.hpp"

namespace ckit {

/// Raised when an integration produces non-finite values or a mass matrix
/// fails to factorize.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double t)
      : std::runtime_error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// M(s) in the left-trivialized velocity, with its labeled blocks.
struct MassPartition {
  MatX full;            // (6 + n_J) square
  Mat6 locked;          // L(s) = _B L_B
  Mat6X coupling;       // A(s) = _B A
  MatX shape;           // S(s)
};

/// Composite-rigid-body assembly of M(s); independent of the base pose.
MassPartition mass_partition(const Model& model, const VecX& shape);
/// sum_L J_L^T M_L J_L with left-trivialized link Jacobians.
MatX mass_matrix_from_jacobians(const Model& model, const VecX& shape);

/// Kinetic energy 0.5 nu^T M nu.
double kinetic_energy(const Model& model, const VecX& shape, const VelocityState& nu);

/// Contact wrench applied to a link.  `wrench` is expressed in the mixed frame
/// C[A]: origin at the contact point, orientation of the inertial frame.
struct ExternalWrench {
  std::string link;
  Transform contact_frame;  // relative to the link frame
  SpatialForce wrench;
};

/// sum_i (^i J)^T f_i with mixed contact Jacobians.
VecX generalized_external_force(const Model& model, const State& state,
                                const std::vector<ExternalWrench>& wrenches);

/// C(q, nu) nu + G(q): recursive Newton-Euler with zero acceleration.
VecX bias_and_gravity(const Model& model, const State& state, const VelocityState& nu);
/// M nudot + C nu + G via recursive Newton-Euler.
VecX inverse_dynamics(const Model& model, const State& state, const VelocityState& nu,
                      const VecX& nudot);

/// nudot solving M nudot = [0; tau] + sum J^T f - (C nu + G).
/// Throws NumericalError if M does not factorize.
VecX forward_dynamics(const Model& model, const State& state, const VelocityState& nu,
                      const VecX& tau, const std::vector<ExternalWrench>& wrenches);

struct TrajectorySample {
  double t = 0.0;
  State state;
  VelocityState velocity;
  /// Auxiliary frame integrated alongside, if requested.
  std::optional<Transform> frame;
};

using TorqueLaw = std::function<VecX(double, const State&, const VelocityState&)>;
using WrenchSchedule = std::function<std::vector<ExternalWrench>(double)>;
/// Right-trivialized velocity of an auxiliary frame, dH/dt = w^ H.
using FrameVelocity = std::function<SpatialMotion(const State&, const VelocityState&)>;

struct SimulationOptions {
  double dt = 1e-3;
  double t_end = 1.0;
  TorqueLaw torque;         // zero if empty
  WrenchSchedule wrenches;  // none if empty
  /// Optional frame integrated with the same RKMK4 stages.
  FrameVelocity frame_velocity;
  Transform frame_initial;
  /// Keep every k-th step (the final sample is always kept).
  std::size_t stride = 1;
};

/// Fixed-step RKMK4: Runge-Kutta 4 on (s, nu) with exponential-map updates of
/// the base pose.  Throws NumericalError with the offending time on
/// non-finite state.
std::vector<TrajectorySample> simulate(const Model& model, const State& initial,
                                       const VelocityState& initial_velocity,
                                       const SimulationOptions& options);

}  // namespace ckit
