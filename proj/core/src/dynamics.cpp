#include "centroidal_kit/dynamics.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "centroidal_kit/lie_integration.hpp"

namespace ckit {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

}  // namespace

MassPartition mass_partition(const Model& model, const VecX& shape) {
  const std::size_t n = model.dof();
  const auto poses = link_poses(model, State{Transform::Identity(), shape});

  // Composite inertias in base coordinates, accumulated leaves-first.
  std::vector<Mat6> composite(model.link_count());
  for (std::size_t l = 0; l < model.link_count(); ++l) {
    composite[l] = inertia_to_frame(model.links()[l].inertia, poses[l]).matrix();
  }
  const auto& order = model.traversal();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (const auto j = model.parent_joint(*it)) {
      composite[model.joint_parent_link(*j)] += composite[*it];
    }
  }

  Mat6X subspace(6, idx(n));
  Mat6X force(6, idx(n));
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t child = model.joint_child_link(j);
    subspace.col(idx(j)) = transform_motion(poses[child], joint_subspace(model.joints()[j])).vector();
    force.col(idx(j)) = composite[child] * subspace.col(idx(j));
  }

  MassPartition mp;
  mp.locked = composite[model.base_index()];
  mp.coupling = force;
  mp.shape = MatX::Zero(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double value = 0.0;
      if (model.joint_supports(i, j)) {
        value = subspace.col(idx(i)).dot(force.col(idx(j)));
      } else if (model.joint_supports(j, i)) {
        value = subspace.col(idx(j)).dot(force.col(idx(i)));
      }
      mp.shape(idx(i), idx(j)) = value;
      mp.shape(idx(j), idx(i)) = value;
    }
  }
  mp.full.resize(idx(6 + n), idx(6 + n));
  mp.full << mp.locked, mp.coupling, mp.coupling.transpose(), mp.shape;
  return mp;
}

MatX mass_matrix_from_jacobians(const Model& model, const VecX& shape) {
  const State state{Transform::Identity(), shape};
  const Eigen::Index size = idx(6 + model.dof());
  MatX m = MatX::Zero(size, size);
  for (std::size_t l = 0; l < model.link_count(); ++l) {
    const MatX j = frame_jacobian(model, state, l, Transform::Identity(), VelocityRepr::kLeft).full();
    m += j.transpose() * model.links()[l].inertia.matrix() * j;
  }
  return m;
}

double kinetic_energy(const Model& model, const VecX& shape, const VelocityState& nu) {
  const MassPartition mp = mass_partition(model, shape);
  VecX v(6 + nu.shape_rate.size());
  v << nu.base_velocity.vector(), nu.shape_rate;
  return 0.5 * v.dot(mp.full * v);
}

VecX generalized_external_force(const Model& model, const State& state,
                                const std::vector<ExternalWrench>& wrenches) {
  VecX out = VecX::Zero(idx(6 + model.dof()));
  for (const auto& w : wrenches) {
    const Jacobian jac = frame_jacobian(model, state, model.link_index(w.link), w.contact_frame,
                                        VelocityRepr::kMixed);
    out.head<6>() += jac.base_block.transpose() * w.wrench.vector();
    out.tail(idx(model.dof())) += jac.shape_block.transpose() * w.wrench.vector();
  }
  return out;
}

VecX inverse_dynamics(const Model& model, const State& state, const VelocityState& nu,
                      const VecX& nudot) {
  const std::size_t nl = model.link_count();
  const auto poses = link_poses(model, state);
  std::vector<SpatialMotion> vel(nl);
  std::vector<SpatialMotion> acc(nl);
  std::vector<SpatialForce> force(nl);

  const std::size_t base = model.base_index();
  vel[base] = nu.base_velocity;
  acc[base] = SpatialMotion(Vec6(nudot.head<6>()));
  for (std::size_t l : model.traversal()) {
    if (const auto j = model.parent_joint(l)) {
      const JointSpec& js = model.joints()[*j];
      const std::size_t p = model.joint_parent_link(*j);
      const double qd = nu.shape_rate[idx(*j)];
      const double qdd = nudot[idx(6 + *j)];
      const Transform child_from_parent =
          (js.origin() * joint_motion(js, state.shape[idx(*j)])).inverse();
      const SpatialMotion s = joint_subspace(js);
      vel[l] = transform_motion(child_from_parent, vel[p]) + s * qd;
      acc[l] = transform_motion(child_from_parent, acc[p]) + s * qdd + cross6(vel[l], s * qd);
    }
    const SpatialInertia& in = model.links()[l].inertia;
    const SpatialMotion gravity(Vec3(poses[l].rotation.transpose() * model.gravity()), Vec3::Zero());
    force[l] = in * acc[l] + crossdual6(vel[l], in * vel[l]) - in * gravity;
  }

  VecX out(idx(6 + model.dof()));
  const auto& order = model.traversal();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t l = *it;
    const auto j = model.parent_joint(l);
    if (!j) continue;
    const JointSpec& js = model.joints()[*j];
    out[idx(6 + *j)] = joint_subspace(js).vector().dot(force[l].vector());
    const Transform parent_from_child = js.origin() * joint_motion(js, state.shape[idx(*j)]);
    const std::size_t p = model.joint_parent_link(*j);
    force[p] = force[p] + transform_force(parent_from_child, force[l]);
  }
  out.head<6>() = force[base].vector();
  return out;
}

VecX bias_and_gravity(const Model& model, const State& state, const VelocityState& nu) {
  return inverse_dynamics(model, state, nu, VecX::Zero(idx(6 + model.dof())));
}

VecX forward_dynamics(const Model& model, const State& state, const VelocityState& nu,
                      const VecX& tau, const std::vector<ExternalWrench>& wrenches) {
  const MassPartition mp = mass_partition(model, state.shape);
  VecX rhs = -bias_and_gravity(model, state, nu);
  rhs.tail(idx(model.dof())) += tau;
  if (!wrenches.empty()) rhs += generalized_external_force(model, state, wrenches);
  Eigen::LLT<MatX> llt(mp.full);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("mass matrix is not positive definite",
                         std::numeric_limits<double>::quiet_NaN());
  }
  return llt.solve(rhs);
}

namespace {

struct StageRates {
  SpatialMotion base;   // left-trivialized base velocity
  VecX shape_rate;
  VecX accel;
  SpatialMotion frame;  // right-trivialized auxiliary frame velocity
};

}  // namespace

std::vector<TrajectorySample> simulate(const Model& model, const State& initial,
                                       const VelocityState& initial_velocity,
                                       const SimulationOptions& options) {
  if (!(options.dt > 0.0) || !(options.t_end >= 0.0)) {
    throw std::invalid_argument("simulate: dt must be positive and t_end non-negative");
  }
  const std::size_t n = model.dof();
  const bool with_frame = static_cast<bool>(options.frame_velocity);
  const VecX zero_tau = VecX::Zero(idx(n));
  const std::size_t stride = std::max<std::size_t>(options.stride, 1);

  auto rates = [&](double t, const State& st, const VelocityState& vs) {
    const VecX tau = options.torque ? options.torque(t, st, vs) : zero_tau;
    const auto wrenches = options.wrenches ? options.wrenches(t) : std::vector<ExternalWrench>{};
    StageRates r;
    r.base = vs.base_velocity;
    r.shape_rate = vs.shape_rate;
    try {
      r.accel = forward_dynamics(model, st, vs, tau, wrenches);
    } catch (const NumericalError& e) {
      throw NumericalError(fmt::format("{} at t = {:.17g}", e.what(), t), t);
    }
    if (with_frame) r.frame = options.frame_velocity(st, vs);
    return r;
  };

  State state = initial;
  VelocityState vel = initial_velocity;
  Transform frame = options.frame_initial;

  std::vector<TrajectorySample> out;
  auto record = [&](double t) {
    TrajectorySample s{t, state, vel, std::nullopt};
    if (with_frame) s.frame = frame;
    out.push_back(std::move(s));
  };
  record(0.0);

  const auto steps = static_cast<std::size_t>(std::ceil(options.t_end / options.dt - 1e-9));
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * options.dt;
    const double h = std::min(options.dt, options.t_end - t);

    // Stage evaluation at offsets (u, w, dy) from the current step start.
    auto stage = [&](double tau, const SpatialMotion& u, const SpatialMotion& w, const VecX& ds,
                     const VecX& dnu) {
      State st{state.base_pose * exp_se3(u), state.shape + ds};
      VelocityState vs{SpatialMotion(Vec6(vel.base_velocity.vector() + dnu.head<6>())),
                       vel.shape_rate + dnu.tail(idx(n))};
      StageRates r = rates(tau, st, vs);
      r.base = dexpinv_left(u, r.base);
      if (with_frame) r.frame = dexpinv_right(w, r.frame);
      return r;
    };

    const VecX zs = VecX::Zero(idx(n));
    const VecX znu = VecX::Zero(idx(6 + n));
    const StageRates k1 = stage(t, SpatialMotion::Zero(), SpatialMotion::Zero(), zs, znu);
    const StageRates k2 = stage(t + 0.5 * h, 0.5 * h * k1.base, 0.5 * h * k1.frame,
                                0.5 * h * k1.shape_rate, 0.5 * h * k1.accel);
    const StageRates k3 = stage(t + 0.5 * h, 0.5 * h * k2.base, 0.5 * h * k2.frame,
                                0.5 * h * k2.shape_rate, 0.5 * h * k2.accel);
    const StageRates k4 = stage(t + h, h * k3.base, h * k3.frame, h * k3.shape_rate, h * k3.accel);

    const double w6 = h / 6.0;
    state.base_pose = state.base_pose *
                      exp_se3(w6 * (k1.base + 2.0 * k2.base + 2.0 * k3.base + k4.base));
    state.shape += w6 * (k1.shape_rate + 2.0 * k2.shape_rate + 2.0 * k3.shape_rate + k4.shape_rate);
    const VecX dnu = w6 * (k1.accel + 2.0 * k2.accel + 2.0 * k3.accel + k4.accel);
    vel.base_velocity = SpatialMotion(Vec6(vel.base_velocity.vector() + dnu.head<6>()));
    vel.shape_rate += dnu.tail(idx(n));
    if (with_frame) {
      frame = exp_se3(w6 * (k1.frame + 2.0 * k2.frame + 2.0 * k3.frame + k4.frame)) * frame;
    }

    const double t_next = (k + 1 == steps) ? options.t_end : static_cast<double>(k + 1) * options.dt;
    if (!state.base_pose.rotation.allFinite() || !state.base_pose.origin.allFinite() ||
        !state.shape.allFinite() || !vel.base_velocity.vector().allFinite() ||
        !vel.shape_rate.allFinite() || (with_frame && !frame.origin.allFinite())) {
      throw NumericalError(fmt::format("non-finite state at t = {:.17g}", t_next), t_next);
    }
    if ((k + 1) % stride == 0 || k + 1 == steps) record(t_next);
  }
  return out;
}

}  // namespace ckit
