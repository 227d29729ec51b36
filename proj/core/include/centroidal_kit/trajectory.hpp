#pragma once

// Prescribed joint trajectories s(t) used to drive shape loops.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "centroidal_kit/spatial.hpp"

namespace ckit {

/// s(t) and sdot(t) over [0, duration].
class ShapeTrajectory {
 public:
  using Fn = std::function<VecX(double)>;

  ShapeTrajectory(std::size_t dof, double duration, Fn position, Fn velocity)
      : dof_(dof), duration_(duration), position_(std::move(position)),
        velocity_(std::move(velocity)) {}

  std::size_t dof() const { return dof_; }
  double duration() const { return duration_; }
  VecX position(double t) const { return position_(t); }
  VecX velocity(double t) const { return velocity_(t); }

  /// max |s(duration) - s(0)|.
  double closure_gap() const;

  /// s1 = (3 pi / 2)(cos(2 pi t / T) - 1), s2 = (pi / 2) sin(2 pi t / T).
  static ShapeTrajectory Sinusoid(double period);
  /// s(t) = center + sum_k a_k sin(2 pi k t / T + phi_k), a closed loop.
  static ShapeTrajectory Fourier(const VecX& center, const MatX& amplitudes, const MatX& phases,
                                 double period);
  /// Constant shape.
  static ShapeTrajectory Constant(const VecX& shape, double duration);
  /// Cubic Hermite interpolation of samples.  If `rates` is empty, rates are
  /// computed by central differences on the sample grid (one-sided at the ends).
  static ShapeTrajectory FromSamples(std::vector<double> times, std::vector<VecX> shapes,
                                     std::vector<VecX> rates = {});

 private:
  std::size_t dof_;
  double duration_;
  Fn position_;
  Fn velocity_;
};

/// Parses `sinusoid:T=<seconds>`, `sinusoid` (T = 10) or a delimited text
/// file with columns t, s_1..s_n[, sdot_1..sdot_n].
ShapeTrajectory resolve_shape_trajectory(const std::string& spec, std::size_t dof);
/// Reads the delimited file format; `dof` decides whether rate columns exist.
ShapeTrajectory read_shape_trajectory(std::istream& in, std::size_t dof);

}  // namespace ckit
