#pragma once

// Mechanical connection A(s) = L^{-1}(s) A(s), its curvature, sampled flatness
// decisions, the frame function F(s) built by axis-wise integration, and
// holonomy of closed shape loops.

#include <cstddef>
#include <functional>
#include <vector>

#include "centroidal_kit/centroidal.hpp"
#include "centroidal_kit/trajectory.hpp"

namespace ckit {

/// 6 x n_J, column i is A_i(s) in B.  Throws NumericalError if L does not
/// factorize.
Mat6X connection(const Model& model, const VecX& shape);

/// B_ij = dA_i/ds_j - dA_j/ds_i + A_i x A_j with central differences of step h.
/// Throws std::out_of_range for bad indices.
SpatialMotion curvature(const Model& model, const VecX& shape, std::size_t i, std::size_t j,
                        double h = 1e-4);

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  /// count points from lo to hi inclusive (lo alone when count == 1).
  double at(std::size_t k) const;
};

/// Per-joint sample ranges, in joint order.
struct FlatnessGrid {
  std::vector<AxisRange> axes;

  std::size_t size() const;
  /// Sample with linear index k; the first axis varies slowest.
  VecX sample(std::size_t k) const;
};

/// [-pi, pi] for revolute joints and [-1, 1] m for prismatic joints.
FlatnessGrid default_grid(const Model& model, std::size_t count = 20);

struct PairMax {
  std::size_t i = 0;
  std::size_t j = 0;
  double max_norm = 0.0;
};

struct FlatnessReport {
  FlatnessGrid grid;
  double h = 1e-4;
  double tol = 1e-7;
  std::vector<PairMax> pairs;  // i < j, lexicographic
  double max_norm = 0.0;
  bool flat = true;
  /// Grid point and pair attaining max_norm (first in grid order on ties).
  std::size_t worst_index = 0;
  VecX worst_sample;
  std::size_t worst_i = 0;
  std::size_t worst_j = 0;
};

/// Worker count for grid scans: CENTROIDAL_KIT_THREADS if set and positive,
/// otherwise the hardware concurrency.
std::size_t scan_threads();

/// Evaluates every pair i < j at every grid point.  The result does not
/// depend on `threads` (0 means scan_threads()).
FlatnessReport flatness_report(const Model& model, const FlatnessGrid& grid, double tol = 1e-7,
                               double h = 1e-4, std::size_t threads = 0);

/// s -> ^B F(s) built by integrating dDelta/dsigma = A_k^ Delta along each
/// coordinate axis in turn, starting from F(0).
class FrameFunction {
 public:
  FrameFunction(const Model& model, std::size_t steps, Transform base, bool reversed);

  Transform operator()(const VecX& shape) const;
  std::size_t steps() const { return steps_; }
  const Transform& base() const { return base_; }
  bool reversed() const { return reversed_; }

 private:
  const Model* model_;
  std::size_t steps_;
  Transform base_;
  bool reversed_;
};

/// The model must outlive the returned function.
FrameFunction construct_frame_function(const Model& model, std::size_t steps = 200,
                                       const Transform& base = Transform::Identity(),
                                       bool reversed = false);

/// |vee((F(s + h e_i) - F(s - h e_i)) / 2h F(s)^{-1}) - A_i(s)| for each i.
VecX verify_frame_function(const Model& model, const FrameFunction& f, const VecX& shape,
                           double h = 1e-5);

struct HolonomyResult {
  Transform drift;           // ^B H_C(T) (^B H_C(0))^{-1}
  double angle = 0.0;        // rad
  double origin_distance = 0.0;  // |o_C(T) - o_C(0)|, m
  double com_drift = 0.0;    // max_t |^C p_com(t) - ^C p_com(0)|, m
  CentroidalTrajectory frames;
};

/// Integrates the centroidal frame along a closed loop with the base held at
/// the identity.  Throws std::invalid_argument if the loop is open beyond 1e-9.
HolonomyResult holonomy(const Model& model, const ShapeTrajectory& loop, double dt = 1e-3,
                        std::size_t stride = 1);

struct SmallLoopResult {
  SpatialMotion drift;      // vee(log drift)
  SpatialMotion predicted;  // eps^2 B_ij(s0)
  double mismatch = 0.0;    // |drift - predicted|
};

/// Square loop of side eps in the (s_j, s_i) plane starting at s0: along +e_j,
/// then +e_i, -e_j, -e_i.  Throws std::invalid_argument if i == j.
SmallLoopResult small_loop_check(const Model& model, const VecX& s0, std::size_t i, std::size_t j,
                                 double eps, std::size_t steps_per_side = 64);

}  // namespace ckit
