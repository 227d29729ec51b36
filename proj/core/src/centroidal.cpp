#include "centroidal_kit/centroidal.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "centroidal_kit/lie_integration.hpp"

namespace ckit {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

Vec6 solve_locked(const Mat6& locked, const Vec6& rhs) {
  Eigen::LLT<Mat6> llt(locked);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("locked inertia is not positive definite",
                         std::numeric_limits<double>::quiet_NaN());
  }
  return llt.solve(rhs);
}

Vec6 base_momentum(const MassPartition& mp, const VelocityState& nu) {
  return mp.locked * nu.base_velocity.vector() + mp.coupling * nu.shape_rate;
}

SpatialMotion locked_velocity_b(const MassPartition& mp, const VelocityState& nu) {
  const Vec6 correction = solve_locked(mp.locked, mp.coupling * nu.shape_rate);
  return SpatialMotion(Vec6(nu.base_velocity.vector() + correction));
}

bool finite(const Transform& h) { return h.rotation.allFinite() && h.origin.allFinite(); }

}  // namespace

std::string_view to_string(FrameTag tag) {
  switch (tag) {
    case FrameTag::kA: return "A";
    case FrameTag::kB: return "B";
    case FrameTag::kG: return "G";
    case FrameTag::kN: return "N";
    case FrameTag::kC: return "C";
  }
  return "?";
}

Transform frame_pose(const Model& model, const State& state, FrameTag frame) {
  switch (frame) {
    case FrameTag::kA: return Transform::Identity();
    case FrameTag::kB: return state.base_pose;
    case FrameTag::kG: return Transform::Translation(com(model, state));
    case FrameTag::kN: return Transform(state.base_pose.rotation, com(model, state));
    case FrameTag::kC: break;
  }
  throw std::invalid_argument("the centroidal frame is not a function of the state");
}

Momentum express_in(const Model& model, const State& state, const Momentum& j, FrameTag target) {
  if (j.frame() == target) return j;
  const Transform target_from_source =
      frame_pose(model, state, target).inverse() * frame_pose(model, state, j.frame());
  return Momentum(force_transform(target_from_source) * j.value(), target);
}

Momentum total_momentum(const Model& model, const State& state, const VelocityState& nu,
                        FrameTag frame) {
  const MassPartition mp = mass_partition(model, state.shape);
  return express_in(model, state, Momentum(base_momentum(mp, nu), FrameTag::kB), frame);
}

Momentum total_momentum_by_links(const Model& model, const State& state, const VelocityState& nu,
                                 FrameTag frame) {
  const Transform target_inv = frame_pose(model, state, frame).inverse();
  const auto poses = link_poses(model, state);
  Vec6 sum = Vec6::Zero();
  for (std::size_t l = 0; l < model.link_count(); ++l) {
    const SpatialMotion v =
        frame_jacobian(model, state, l, Transform::Identity(), VelocityRepr::kLeft).apply(nu);
    const SpatialForce h = model.links()[l].inertia * v;
    sum += force_transform(target_inv * poses[l]) * h.vector();
  }
  return Momentum(sum, frame);
}

SpatialMotion locked_velocity(const Model& model, const State& state, const VelocityState& nu,
                              FrameTag frame) {
  const SpatialMotion vb = locked_velocity_b(mass_partition(model, state.shape), nu);
  switch (frame) {
    case FrameTag::kB: return vb;
    case FrameTag::kA: return transform_motion(state.base_pose, vb);
    case FrameTag::kN:
      return transform_motion(frame_pose(model, state, FrameTag::kN).inverse() * state.base_pose,
                              vb);
    default: break;
  }
  throw std::invalid_argument(
      fmt::format("locked velocity is available in B, A or N, not {}", to_string(frame)));
}

SpatialMotion average_velocity(const Model& model, const State& state, const VelocityState& nu) {
  const SpatialMotion vb = locked_velocity(model, state, nu, FrameTag::kB);
  return transform_motion(frame_pose(model, state, FrameTag::kG).inverse() * state.base_pose, vb);
}

SpatialMotion average_velocity_from_momentum(const Model& model, const State& state,
                                             const VelocityState& nu) {
  const Mat6 lg = locked_inertia_at(model, state, FrameTag::kG);
  const Momentum jg = total_momentum(model, state, nu, FrameTag::kG);
  return SpatialMotion(solve_locked(lg, jg.value()));
}

Mat6 locked_inertia_at(const Model& model, const State& state, FrameTag frame) {
  const Mat6 locked = mass_partition(model, state.shape).locked;
  const Transform f_from_b = frame_pose(model, state, frame).inverse() * state.base_pose;
  const Mat6 out = force_transform(f_from_b) * locked * motion_transform(f_from_b.inverse());
  return 0.5 * (out + out.transpose());
}

Vec6 momentum_rate(const Model& model, const State& state, const VelocityState& /*nu*/,
                   const VecX& /*tau*/, const std::vector<ExternalWrench>& wrenches) {
  const double m = model.total_mass();
  const Vec3 weight = m * model.gravity();
  Vec6 rate;
  rate << weight, com(model, state).cross(weight);
  for (const auto& w : wrenches) {
    const Transform contact = link_pose(model, state, w.link) * w.contact_frame;
    rate += force_transform(Transform::Translation(contact.origin)) * w.wrench.vector();
  }
  return rate;
}

std::pair<double, double> momentum_map_pairing(const Model& model, const State& state,
                                               const VelocityState& nu, const SpatialMotion& xi) {
  const double left = total_momentum(model, state, nu, FrameTag::kA).value().dot(xi.vector());

  const MassPartition mp = mass_partition(model, state.shape);
  const std::size_t n = model.dof();
  VecX generator = VecX::Zero(idx(6 + n));
  generator.head<6>() = motion_transform(state.base_pose.inverse()) * xi.vector();
  VecX v(idx(6 + n));
  v << nu.base_velocity.vector(), nu.shape_rate;
  const double right = v.dot(mp.full * generator);
  return {left, right};
}

MotionSource shape_only_motion(const ShapeTrajectory& shape, const Transform& base_pose) {
  return [shape, base_pose](double t) {
    return MotionSample{State{base_pose, shape.position(t)},
                        VelocityState{SpatialMotion::Zero(), shape.velocity(t)}};
  };
}

Transform default_centroidal_initial(const Model& model, const State& state) {
  return Transform(state.base_pose.rotation, com(model, state));
}

CentroidalTrajectory integrate_centroidal_frame(const Model& model, const MotionSource& motion,
                                                const CentroidalOptions& options) {
  if (!(options.dt > 0.0) || !(options.t_end >= options.t0)) {
    throw std::invalid_argument("centroidal frame: dt must be positive and t_end >= t0");
  }
  const std::size_t stride = std::max<std::size_t>(options.stride, 1);
  auto velocity = [&](double t, const Transform&) {
    const MotionSample m = motion(t);
    const SpatialMotion v = locked_velocity(model, m.state, m.velocity, FrameTag::kA);
    if (!v.vector().allFinite()) {
      throw NumericalError(fmt::format("non-finite locked velocity at t = {:.17g}", t), t);
    }
    return v;
  };

  Transform h = options.initial ? *options.initial
                                : default_centroidal_initial(model, motion(options.t0).state);
  CentroidalTrajectory out{{options.t0, h}};
  const double span = options.t_end - options.t0;
  const auto steps = static_cast<std::size_t>(std::ceil(span / options.dt - 1e-9));
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = options.t0 + static_cast<double>(k) * options.dt;
    const double t_next =
        (k + 1 == steps) ? options.t_end : options.t0 + static_cast<double>(k + 1) * options.dt;
    h = rkmk4_step_right(h, t, t_next - t, velocity);
    if (!finite(h)) {
      throw NumericalError(fmt::format("non-finite centroidal frame at t = {:.17g}", t_next),
                           t_next);
    }
    if ((k + 1) % stride == 0 || k + 1 == steps) out.push_back({t_next, h});
  }
  return out;
}

std::vector<TrajectorySample> simulate_with_centroidal_frame(
    const Model& model, const State& initial, const VelocityState& initial_velocity,
    SimulationOptions options, std::optional<Transform> frame_initial) {
  options.frame_initial = frame_initial ? *frame_initial : default_centroidal_initial(model, initial);
  options.frame_velocity = [&model](const State& st, const VelocityState& vs) {
    return locked_velocity(model, st, vs, FrameTag::kA);
  };
  return simulate(model, initial, initial_velocity, options);
}

std::vector<TrajectorySample> prescribed_shape_motion(const Model& model,
                                                      const ShapeTrajectory& shape,
                                                      const Transform& base_pose,
                                                      const Vec6& momentum_a, double dt,
                                                      std::optional<Transform> frame_initial) {
  if (!(dt > 0.0)) throw std::invalid_argument("prescribed motion: dt must be positive");
  if (shape.dof() != model.dof()) {
    throw std::invalid_argument("prescribed motion: trajectory and model dof differ");
  }

  // Base body velocity and right-trivialized locked velocity at (t, H).
  struct Rates {
    SpatialMotion base;
    SpatialMotion frame;
  };
  auto rates = [&](double t, const Transform& h) {
    const VecX s = shape.position(t);
    const VecX sd = shape.velocity(t);
    const MassPartition mp = mass_partition(model, s);
    const Vec6 jb = force_transform(h.inverse()) * momentum_a;
    const Vec6 vloc = solve_locked(mp.locked, jb);
    const Vec6 v = vloc - solve_locked(mp.locked, mp.coupling * sd);
    return Rates{SpatialMotion(v), transform_motion(h, SpatialMotion(vloc))};
  };
  auto sample = [&](double t, const Transform& h, const Transform& hc) {
    const Rates r = rates(t, h);
    return TrajectorySample{t, State{h, shape.position(t)},
                            VelocityState{r.base, shape.velocity(t)}, hc};
  };

  Transform h = base_pose;
  const State initial{h, shape.position(0.0)};
  Transform hc = frame_initial ? *frame_initial : default_centroidal_initial(model, initial);
  std::vector<TrajectorySample> out{sample(0.0, h, hc)};

  const double t_end = shape.duration();
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double t_next = (k + 1 == steps) ? t_end : static_cast<double>(k + 1) * dt;
    const double step = t_next - t;
    auto stage = [&](double tau, const SpatialMotion& u, const SpatialMotion& w) {
      Rates r = rates(tau, h * exp_se3(u));
      return Rates{dexpinv_left(u, r.base), dexpinv_right(w, r.frame)};
    };
    const Rates k1 = stage(t, SpatialMotion::Zero(), SpatialMotion::Zero());
    const Rates k2 = stage(t + 0.5 * step, 0.5 * step * k1.base, 0.5 * step * k1.frame);
    const Rates k3 = stage(t + 0.5 * step, 0.5 * step * k2.base, 0.5 * step * k2.frame);
    const Rates k4 = stage(t + step, step * k3.base, step * k3.frame);
    const double w6 = step / 6.0;
    h = h * exp_se3(w6 * (k1.base + 2.0 * k2.base + 2.0 * k3.base + k4.base));
    hc = exp_se3(w6 * (k1.frame + 2.0 * k2.frame + 2.0 * k3.frame + k4.frame)) * hc;
    if (!finite(h) || !finite(hc)) {
      throw NumericalError(fmt::format("non-finite state at t = {:.17g}", t_next), t_next);
    }
    out.push_back(sample(t_next, h, hc));
  }
  return out;
}

double centroidal_com_drift(const Model& model, const MotionSource& motion,
                            const CentroidalTrajectory& trajectory) {
  if (trajectory.empty()) return 0.0;
  auto local_com = [&](const CentroidalSample& c) {
    return Vec3(c.pose.inverse().apply(com(model, motion(c.t).state)));
  };
  const Vec3 start = local_com(trajectory.front());
  double worst = 0.0;
  for (const auto& c : trajectory) worst = std::max(worst, (local_com(c) - start).norm());
  return worst;
}

}  // namespace ckit
