// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.  Expected values come from finite differences, per-body sums or
// frozen fine-step regressions, never from the quantity under test.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <centroidal_kit/centroidal.hpp>
#include <centroidal_kit/integrability.hpp>

#include "generators.hpp"

namespace {

using namespace ckit;
using ckit::testing::Gen;
using ckit::testing::max_abs;
using std::numbers::pi;

// Fine-step (dt = 1e-4) drift of the d = 1 sinusoid; dt = 1e-3 agrees to 1e-13.
constexpr double kFrozenDrift = 0.59361037304445;

struct Verdict {
  bool ok = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cli_exit_code(const std::string& args) {
  const int status = std::system(fmt::format("{} {} > /dev/null 2>&1", CENTROIDAL_KIT_CLI, args).c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double geodesic(const Transform& a, const Transform& b) {
  return rotation_angle(a.rotation.transpose() * b.rotation);
}

State advance(const State& s, const VelocityState& nu, double t) {
  return State{s.base_pose * exp_se3(nu.base_velocity, t), s.shape + t * nu.shape_rate};
}

Verdict flatness_dichotomy() {
  Verdict v;
  std::string detail;
  for (double d : {0.0, 1.0}) {
    const Model m = three_link(d);
    const auto t0 = std::chrono::steady_clock::now();
    const FlatnessReport r = flatness_report(m, default_grid(m, 20), 1e-7, 1e-4);
    const double lib_time = seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();
    const int code = cli_exit_code(fmt::format("check-flatness --model three-link:d={:g} --grid 20 --h 1e-4", d));
    const double cli_time = seconds_since(t1);
    const bool ok = d == 0.0 ? (r.flat && r.max_norm <= 1e-7 && code == 0)
                             : (!r.flat && r.max_norm >= 0.01 && code == 2);
    v.ok = v.ok && ok && lib_time <= 5.0 && cli_time <= 5.0;
    detail += fmt::format("{}d={:g}: max|B|={:.3e} {} exit={} ({:.3f}s lib, {:.3f}s cli)", detail.empty() ? "" : "; ", d, r.max_norm,
                          r.flat ? "flat" : "non-flat", code, lib_time, cli_time);
  }
  v.detail = detail;
  return v;
}

Verdict holonomy_reproduction() {
  const ShapeTrajectory loop = ShapeTrajectory::Sinusoid(10.0);
  const auto t0 = std::chrono::steady_clock::now();
  const HolonomyResult flat = holonomy(three_link(0.0), loop, 1e-3, 100);
  const HolonomyResult bent = holonomy(three_link(1.0), loop, 1e-3, 100);
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.ok = flat.angle <= 1e-5 && bent.angle >= 0.05 && std::abs(bent.angle - kFrozenDrift) <= 1e-9 &&
         flat.com_drift <= 1e-6 && bent.com_drift <= 1e-6 && elapsed <= 10.0;
  v.detail = fmt::format("d=0 drift {:.3e} rad, d=1 drift {:.13f} rad (frozen {:.13f}), CoM drift {:.1e}/{:.1e} m, {:.2f}s",
                         flat.angle, bent.angle, kFrozenDrift, flat.com_drift, bent.com_drift, elapsed);
  return v;
}

Verdict frame_function_reproduces_frame() {
  const Model m = three_link(0.0);
  const ShapeTrajectory loop = ShapeTrajectory::Sinusoid(10.0);
  const Transform h0(exp_so3(Vec3(0.3, -0.2, 0.7)), Vec3(0.4, -1.0, 2.0));
  double rot = 0.0, pos = 0.0;

  // Base held still: H(t) = H0.
  CentroidalOptions opt;
  opt.t_end = loop.duration();
  opt.dt = 1e-3;
  opt.stride = 10;
  const auto still = integrate_centroidal_frame(m, shape_only_motion(loop, h0), opt);
  const FrameFunction f = construct_frame_function(m, 200, h0.inverse() * still.front().pose);
  for (const auto& x : still) {
    const Transform predicted = h0 * f(loop.position(x.t));
    rot = std::max(rot, geodesic(predicted, x.pose));
    pos = std::max(pos, (predicted.origin - x.pose.origin).norm());
  }

  // Free-floating base with zero momentum.
  const auto floating = prescribed_shape_motion(m, loop, h0, Vec6::Zero(), 1e-3);
  const FrameFunction g = construct_frame_function(m, 200, h0.inverse() * *floating.front().frame);
  for (std::size_t k = 0; k < floating.size(); k += 10) {
    const auto& x = floating[k];
    const Transform predicted = x.state.base_pose * g(x.state.shape);
    rot = std::max(rot, geodesic(predicted, *x.frame));
    pos = std::max(pos, (predicted.origin - x.frame->origin).norm());
  }
  return {rot <= 1e-5 && pos <= 1e-5, fmt::format("max rotation {:.3e} rad, max origin {:.3e} m", rot, pos)};
}

Verdict trivialized_derivative() {
  Gen g(404);
  double worst_three = 0.0, worst_coaxial = 0.0;
  const Model m = three_link(0.0);
  const FrameFunction f = construct_frame_function(m);
  for (int k = 0; k < 50; ++k) worst_three = std::max(worst_three, verify_frame_function(m, f, g.vecx(2, pi)).maxCoeff());
  const Model c = ckit::testing::random_coaxial(g, 3);
  const FrameFunction fc = construct_frame_function(c);
  for (int k = 0; k < 50; ++k) worst_coaxial = std::max(worst_coaxial, verify_frame_function(c, fc, g.vecx(3, pi)).maxCoeff());
  return {worst_three <= 1e-5 && worst_coaxial <= 1e-5,
          fmt::format("max residual three_link(0) {:.3e}, coaxial 3-DOF {:.3e}", worst_three, worst_coaxial)};
}

Verdict momentum_conservation() {
  const Model m = three_link(1.0).with_gravity(Vec3::Zero());
  Gen g(505);
  double worst_a = 0.0, worst_g = 0.0;
  for (int run = 0; run < 10; ++run) {
    const State s0{g.transform(), g.vecx(2, pi)};
    const VelocityState nu0{g.motion(), g.vecx(2)};
    SimulationOptions opt;
    opt.dt = 1e-3;
    opt.t_end = 10.0;
    opt.stride = 10;
    const auto traj = simulate(m, s0, nu0, opt);
    const Vec6 ja0 = total_momentum(m, s0, nu0, FrameTag::kA).value();
    const Vec6 jg0 = total_momentum(m, s0, nu0, FrameTag::kG).value();
    for (const auto& x : traj) {
      worst_a = std::max(worst_a, (total_momentum(m, x.state, x.velocity, FrameTag::kA).value() - ja0).norm() / ja0.norm());
      worst_g = std::max(worst_g, (total_momentum(m, x.state, x.velocity, FrameTag::kG).value() - jg0).norm() / jg0.norm());
    }
  }
  return {worst_a <= 1e-6 && worst_g <= 1e-6,
          fmt::format("max relative drift J_A {:.3e}, J_G {:.3e} over 10 runs of 10 s", worst_a, worst_g)};
}

Verdict forced_momentum_evolution() {
  const Model m = three_link(1.0);
  Gen g(606);
  const double t_end = 2.0, dt = 1e-3;
  const SpatialForce peak(Vec3(3.0, -1.0, 4.0), Vec3(0.2, 0.5, -0.3));
  const Transform contact = Transform::Translation(Vec3(0.8, 0.1, 0.0));
  const WrenchSchedule schedule = [&](double t) {
    const double w = std::pow(std::sin(pi * t / t_end), 2);
    return std::vector<ExternalWrench>{{"link2", contact, SpatialForce(Vec6(w * peak.vector()))}};
  };
  SimulationOptions opt;
  opt.dt = dt;
  opt.t_end = t_end;
  opt.wrenches = schedule;
  opt.torque = [](double, const State& s, const VelocityState& nu) { return VecX(-2.0 * s.shape - nu.shape_rate); };
  const auto traj = simulate(m, State{g.transform(), g.vecx(2)}, VelocityState{g.motion(), g.vecx(2)}, opt);
  std::vector<Vec6> ja;
  for (const auto& x : traj) ja.push_back(total_momentum(m, x.state, x.velocity, FrameTag::kA).value());
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const Vec6 fd = (ja[k + 1] - ja[k - 1]) / (2 * dt);
    const Vec6 rate = momentum_rate(m, traj[k].state, traj[k].velocity, VecX::Zero(2), schedule(traj[k].t));
    worst = std::max(worst, (fd - rate).norm() / rate.norm());
  }
  return {worst <= 1e-5, fmt::format("max relative error {:.3e} at {} samples", worst, traj.size() - 2)};
}

Verdict average_locked_identity() {
  Gen g(707);
  double angular = 0.0, linear = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Model m = k % 2 ? three_link(1.0) : ckit::testing::random_tree(g, g.index(2, 6));
    const State s = ckit::testing::random_state(g, m);
    const VelocityState nu = ckit::testing::random_velocity(g, m);
    const SpatialMotion ave = average_velocity(m, s, nu);
    const SpatialMotion loc = locked_velocity(m, s, nu, FrameTag::kA);
    angular = std::max(angular, (ave.angular() - loc.angular()).cwiseAbs().maxCoeff());
    const double h = 1e-6;
    const Vec3 fd = (com(m, advance(s, nu, h)) - com(m, advance(s, nu, -h))) / (2 * h);
    linear = std::max(linear, (ave.linear() - fd).cwiseAbs().maxCoeff());
  }
  return {angular <= 1e-12 && linear <= 1e-5,
          fmt::format("max angular mismatch {:.3e}, max CoM-rate mismatch {:.3e}", angular, linear)};
}

Verdict momentum_map_pairing_check() {
  Gen g(808);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Model m = k % 2 ? three_link(1.0) : ckit::testing::random_tree(g, g.index(1, 6));
    const State s = ckit::testing::random_state(g, m);
    const VelocityState nu = ckit::testing::random_velocity(g, m);
    const auto [pair, fiber] = momentum_map_pairing(m, s, nu, g.motion());
    worst = std::max(worst, std::abs(pair - fiber));
  }
  return {worst <= 1e-10, fmt::format("max |<J, xi> - FL.xi_Q| = {:.3e}", worst)};
}

Verdict structural_invariants() {
  Gen g(909);
  std::vector<std::string> failed;
  auto require = [&](bool ok, const char* what) {
    if (!ok) failed.emplace_back(what);
  };

  double sym = 0.0, min_eig = 1.0, pose = 0.0, anti = 0.0, block = 0.0, jac = 0.0, jacobi = 0.0;
  for (int k = 0; k < 30; ++k) {
    const Model m = ckit::testing::random_tree(g, g.index(3, 6));
    const State s = ckit::testing::random_state(g, m);
    const MassPartition mp = mass_partition(m, s.shape);
    sym = std::max(sym, max_abs(mp.full - mp.full.transpose()));
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<MatX>(mp.full).eigenvalues().minCoeff());

    // M, the connection and the curvature from poses at a random base pose.
    MatX sum = MatX::Zero(mp.full.rows(), mp.full.cols());
    for (std::size_t l = 0; l < m.link_count(); ++l) {
      const MatX jl = frame_jacobian(m, s, l, Transform::Identity(), VelocityRepr::kLeft).full();
      sum += jl.transpose() * m.links()[l].inertia.matrix() * jl;
    }
    pose = std::max(pose, max_abs(sum - mp.full));
    const State moved{g.transform(), s.shape};
    const Mat6 lb = locked_inertia_at(m, moved, FrameTag::kB);
    pose = std::max(pose, max_abs(lb.ldlt().solve(mp.coupling) - connection(m, s.shape)));

    const std::size_t i = g.index(0, m.dof() - 1), j = g.index(0, m.dof() - 1);
    anti = std::max(anti, (curvature(m, s.shape, i, j).vector() + curvature(m, s.shape, j, i).vector())
                              .cwiseAbs()
                              .maxCoeff());
    for (FrameTag f : {FrameTag::kG, FrameTag::kN}) {
      const Mat6 lf = locked_inertia_at(m, s, f);
      block = std::max({block, max_abs(lf.topRightCorner<3, 3>()), max_abs(lf.bottomLeftCorner<3, 3>()),
                        max_abs(lf.topLeftCorner<3, 3>() - m.total_mass() * Mat3::Identity())});
    }

    // Right-trivialized Jacobian against central differences.
    const std::size_t link = g.index(0, m.link_count() - 1);
    const Jacobian jr = frame_jacobian(m, s, link, Transform::Identity(), VelocityRepr::kRight);
    const Transform mid = link_poses(m, s)[link];
    const double h = 1e-6;
    for (std::size_t q = 0; q < m.dof(); ++q) {
      State p = s, n = s;
      p.shape[static_cast<Eigen::Index>(q)] += h;
      n.shape[static_cast<Eigen::Index>(q)] -= h;
      const Vec6 fd = right_trivialized_difference(link_poses(m, p)[link], link_poses(m, n)[link], mid, h).vector();
      jac = std::max(jac, (jr.shape_block.col(static_cast<Eigen::Index>(q)) - fd).cwiseAbs().maxCoeff());
    }

    const SpatialMotion a = g.motion(), b = g.motion(), c = g.motion();
    const Vec6 cyc = cross6(a, cross6(b, c)).vector() + cross6(b, cross6(c, a)).vector() +
                     cross6(c, cross6(a, b)).vector();
    jacobi = std::max(jacobi, cyc.cwiseAbs().maxCoeff());
  }
  require(sym <= 1e-12 && min_eig > 0.0, "mass matrix symmetric SPD");
  require(pose <= 1e-10, "base-pose independence");
  require(anti <= 1e-12, "curvature antisymmetry");
  require(block <= 1e-12, "centroidal block structure");
  require(jac <= 1e-5, "Jacobian finite differences");
  require(jacobi <= 1e-13, "Jacobi identity");

  const Model bent = three_link(1.0);
  auto ratio = [&](const VecX& s0) {
    return small_loop_check(bent, s0, 0, 1, 1e-2).mismatch / small_loop_check(bent, s0, 0, 1, 5e-3).mismatch;
  };
  double worst_ratio = ratio(VecX::Zero(2));
  for (int k = 0; k < 5; ++k) worst_ratio = std::min(worst_ratio, ratio(g.vecx(2, pi)));
  require(worst_ratio >= 4.0, "small-loop order");

  std::string detail = fmt::format(
      "sym {:.1e}, min eig {:.2e}, pose {:.1e}, antisym {:.1e}, blocks {:.1e}, jac {:.1e}, jacobi {:.1e}, "
      "small-loop ratio >= {:.2f}",
      sym, min_eig, pose, anti, block, jac, jacobi, worst_ratio);
  for (const auto& f : failed) detail += fmt::format("; FAILED {}", f);
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {"flatness dichotomy", flatness_dichotomy},
      {"holonomy of the sinusoidal loop", holonomy_reproduction},
      {"frame function reproduces the centroidal frame", frame_function_reproduces_frame},
      {"trivialized derivative equals the connection", trivialized_derivative},
      {"momentum conservation", momentum_conservation},
      {"forced momentum evolution", forced_momentum_evolution},
      {"average and locked angular velocity", average_locked_identity},
      {"momentum map pairing", momentum_map_pairing_check},
      {"structural invariants", structural_invariants},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Verdict v;
    try {
      v = criteria[k].run();
    } catch (const std::exception& e) {
      v = {false, fmt::format("exception: {}", e.what())};
    }
    failures += v.ok ? 0 : 1;
    fmt::print("{} [{}] {}: {}\n", v.ok ? "PASS" : "FAIL", k + 1, criteria[k].name, v.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
