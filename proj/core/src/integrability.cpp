#include "centroidal_kit/integrability.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "centroidal_kit/lie_integration.hpp"

namespace ckit {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

SpatialMotion column(const Mat6X& a, std::size_t i) { return SpatialMotion(Vec6(a.col(idx(i)))); }

// Connection at s and at s +- h e_k for every k.
struct Stencil {
  Mat6X center;
  std::vector<Mat6X> plus, minus;
};

Stencil stencil(const Model& model, const VecX& s, double h) {
  Stencil st{connection(model, s), {}, {}};
  for (std::size_t k = 0; k < model.dof(); ++k) {
    VecX sp = s, sm = s;
    sp[idx(k)] += h;
    sm[idx(k)] -= h;
    st.plus.push_back(connection(model, sp));
    st.minus.push_back(connection(model, sm));
  }
  return st;
}

SpatialMotion curvature_from(const Stencil& st, std::size_t i, std::size_t j, double h) {
  const Vec6 di_dj = (st.plus[j].col(idx(i)) - st.minus[j].col(idx(i))) / (2.0 * h);
  const Vec6 dj_di = (st.plus[i].col(idx(j)) - st.minus[i].col(idx(j))) / (2.0 * h);
  return SpatialMotion(Vec6(di_dj - dj_di)) + cross6(column(st.center, i), column(st.center, j));
}

// Integrates dH/dsigma = (A(path(sigma)) path'(sigma))^ H with RKMK4 over
// sigma in [0, 1].
Transform integrate_path(const Model& model, const std::function<VecX(double)>& path,
                         const VecX& direction, std::size_t steps, Transform h) {
  auto field = [&](double sigma, const Transform&) {
    const SpatialMotion w(Vec6(connection(model, path(sigma)) * direction));
    if (!w.vector().allFinite()) {
      throw NumericalError(fmt::format("non-finite connection at sigma = {:.17g}", sigma), sigma);
    }
    return w;
  };
  const double ds = 1.0 / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    h = rkmk4_step_right(h, static_cast<double>(k) * ds, ds, field);
  }
  return h;
}

}  // namespace

Mat6X connection(const Model& model, const VecX& shape) {
  const MassPartition mp = mass_partition(model, shape);
  Eigen::LLT<Mat6> llt(mp.locked);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("locked inertia is not positive definite",
                         std::numeric_limits<double>::quiet_NaN());
  }
  return llt.solve(mp.coupling);
}

SpatialMotion curvature(const Model& model, const VecX& shape, std::size_t i, std::size_t j,
                        double h) {
  const std::size_t n = model.dof();
  if (i >= n || j >= n) {
    throw std::out_of_range(fmt::format("curvature index ({}, {}) out of range for {} joints",
                                        i + 1, j + 1, n));
  }
  if (!(h > 0.0)) throw std::invalid_argument("curvature step h must be positive");
  return curvature_from(stencil(model, shape, h), i, j, h);
}

double AxisRange::at(std::size_t k) const {
  if (count <= 1) return lo;
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
}

std::size_t FlatnessGrid::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.count;
  return n;
}

VecX FlatnessGrid::sample(std::size_t k) const {
  VecX s(idx(axes.size()));
  for (std::size_t a = axes.size(); a-- > 0;) {
    s[idx(a)] = axes[a].at(k % axes[a].count);
    k /= axes[a].count;
  }
  return s;
}

FlatnessGrid default_grid(const Model& model, std::size_t count) {
  FlatnessGrid grid;
  for (const auto& j : model.joints()) {
    if (j.type == JointType::kRevolute) {
      grid.axes.push_back({-std::numbers::pi, std::numbers::pi, count});
    } else {
      grid.axes.push_back({-1.0, 1.0, count});
    }
  }
  return grid;
}

std::size_t scan_threads() {
  if (const char* env = std::getenv("CENTROIDAL_KIT_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

FlatnessReport flatness_report(const Model& model, const FlatnessGrid& grid, double tol, double h,
                               std::size_t threads) {
  const std::size_t n = model.dof();
  if (grid.axes.size() != n) {
    throw std::invalid_argument(
        fmt::format("grid has {} axes but the model has {} joints", grid.axes.size(), n));
  }
  if (!(h > 0.0)) throw std::invalid_argument("curvature step h must be positive");

  FlatnessReport report;
  report.grid = grid;
  report.h = h;
  report.tol = tol;
  report.worst_sample = grid.sample(0);
  if (n < 2) return report;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) report.pairs.push_back({i, j, 0.0});
  }

  struct Partial {
    std::vector<double> pair_max;
    double max_norm = -1.0;
    std::size_t index = 0;
    std::size_t pair = 0;
  };
  const std::size_t total = grid.size();
  const std::size_t workers = std::clamp<std::size_t>(threads ? threads : scan_threads(), 1, total);
  std::vector<Partial> partials(workers);
  std::vector<std::exception_ptr> errors(workers);

  auto scan = [&](std::size_t w) {
    Partial& p = partials[w];
    p.pair_max.assign(report.pairs.size(), 0.0);
    const std::size_t begin = total * w / workers;
    const std::size_t end = total * (w + 1) / workers;
    try {
      for (std::size_t k = begin; k < end; ++k) {
        const Stencil st = stencil(model, grid.sample(k), h);
        for (std::size_t q = 0; q < report.pairs.size(); ++q) {
          const double norm =
              curvature_from(st, report.pairs[q].i, report.pairs[q].j, h).vector().norm();
          p.pair_max[q] = std::max(p.pair_max[q], norm);
          if (norm > p.max_norm) {
            p.max_norm = norm;
            p.index = k;
            p.pair = q;
          }
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    scan(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(scan, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Chunks are contiguous and in grid order, so a strict comparison keeps the
  // first maximizer regardless of the worker count.
  double best = -1.0;
  for (const auto& p : partials) {
    for (std::size_t q = 0; q < report.pairs.size(); ++q) {
      report.pairs[q].max_norm = std::max(report.pairs[q].max_norm, p.pair_max[q]);
    }
    if (p.max_norm > best) {
      best = p.max_norm;
      report.worst_index = p.index;
      report.worst_i = report.pairs[p.pair].i;
      report.worst_j = report.pairs[p.pair].j;
    }
  }
  report.max_norm = std::max(best, 0.0);
  report.worst_sample = grid.sample(report.worst_index);
  report.flat = report.max_norm <= tol;
  return report;
}

FrameFunction::FrameFunction(const Model& model, std::size_t steps, Transform base, bool reversed)
    : model_(&model), steps_(std::max<std::size_t>(steps, 1)), base_(base), reversed_(reversed) {}

Transform FrameFunction::operator()(const VecX& shape) const {
  const std::size_t n = model_->dof();
  if (static_cast<std::size_t>(shape.size()) != n) {
    throw std::invalid_argument(
        fmt::format("frame function: shape has {} entries, model has {} joints", shape.size(), n));
  }
  Transform f = base_;
  VecX reached = VecX::Zero(idx(n));
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t k = reversed_ ? n - 1 - m : m;
    const double target = shape[idx(k)];
    if (target != 0.0) {
      VecX direction = VecX::Zero(idx(n));
      direction[idx(k)] = target;
      auto path = [&](double sigma) {
        VecX s = reached;
        s[idx(k)] = sigma * target;
        return s;
      };
      f = integrate_path(*model_, path, direction, steps_, f);
    }
    reached[idx(k)] = target;
  }
  return f;
}

FrameFunction construct_frame_function(const Model& model, std::size_t steps,
                                       const Transform& base, bool reversed) {
  return FrameFunction(model, steps, base, reversed);
}

VecX verify_frame_function(const Model& model, const FrameFunction& f, const VecX& shape,
                           double h) {
  const std::size_t n = model.dof();
  const Mat6X a = connection(model, shape);
  const Transform mid = f(shape);
  VecX out(idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    VecX sp = shape, sm = shape;
    sp[idx(i)] += h;
    sm[idx(i)] -= h;
    const SpatialMotion d = right_trivialized_difference(f(sp), f(sm), mid, h);
    out[idx(i)] = (d.vector() - a.col(idx(i))).norm();
  }
  return out;
}

HolonomyResult holonomy(const Model& model, const ShapeTrajectory& loop, double dt,
                        std::size_t stride) {
  if (loop.dof() != model.dof()) {
    throw std::invalid_argument(fmt::format("loop has {} coordinates, model has {} joints",
                                            loop.dof(), model.dof()));
  }
  const double gap = loop.closure_gap();
  if (gap > 1e-9) {
    throw std::invalid_argument(
        fmt::format("shape loop is not closed: |s(T) - s(0)| = {:.3g}", gap));
  }
  const MotionSource motion = shape_only_motion(loop, Transform::Identity());
  CentroidalOptions opt;
  opt.t0 = 0.0;
  opt.t_end = loop.duration();
  opt.dt = dt;
  opt.stride = stride;

  HolonomyResult r;
  r.frames = integrate_centroidal_frame(model, motion, opt);
  const Transform& start = r.frames.front().pose;
  const Transform& end = r.frames.back().pose;
  r.drift = end * start.inverse();
  r.angle = rotation_angle(r.drift.rotation);
  r.origin_distance = (end.origin - start.origin).norm();
  r.com_drift = centroidal_com_drift(model, motion, r.frames);
  return r;
}

SmallLoopResult small_loop_check(const Model& model, const VecX& s0, std::size_t i, std::size_t j,
                                 double eps, std::size_t steps_per_side) {
  const std::size_t n = model.dof();
  if (i == j) throw std::invalid_argument("small loop needs two distinct joints");
  if (i >= n || j >= n) {
    throw std::out_of_range(fmt::format("small loop index ({}, {}) out of range for {} joints",
                                        i + 1, j + 1, n));
  }
  const VecX ej = VecX::Unit(idx(n), idx(j)) * eps;
  const VecX ei = VecX::Unit(idx(n), idx(i)) * eps;
  const VecX corners[5] = {s0, s0 + ej, s0 + ej + ei, s0 + ei, s0};

  Transform h = Transform::Identity();
  for (int side = 0; side < 4; ++side) {
    const VecX a = corners[side];
    const VecX delta = corners[side + 1] - a;
    h = integrate_path(model, [&](double sigma) { return VecX(a + sigma * delta); }, delta,
                       steps_per_side, h);
  }
  SmallLoopResult r;
  r.drift = log_se3(h);
  r.predicted = (eps * eps) * curvature(model, s0, i, j);
  r.mismatch = (r.drift - r.predicted).vector().norm();
  return r;
}

}  // namespace ckit
