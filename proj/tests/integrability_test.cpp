#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <centroidal_kit/integrability.hpp>

#include "property.hpp"

namespace ckit {
namespace {

using std::numbers::pi;
using testing::for_all;
using testing::Gen;
using testing::max_abs;

// Published closed form of B_12 for the d = 1 three-link mechanism.
Vec6 closed_form_b12(double s1, double s2) {
  const double c1 = std::cos(s1), c2 = std::cos(s2), n1 = std::sin(s1), n2 = std::sin(s2);
  const double root = 2 * std::cos(s1 - s2) + 6 * n1 - 6 * n2 - 28;
  Vec6 b = Vec6::Zero();
  b(0) = 2 * (c1 + c2) * (4 * c1 + 4 * c2 - 3 * c1 * n2 + 3 * c2 * n1);
  b(1) = 2 * c1 * (4 * n1 + 4 * n2 - 3 * n1 * n2 - 3 * n2 * n2) + 2 * c2 * (4 * n1 + 4 * n2 + 3 * n1 * n2 + 3 * n1 * n1);
  b(5) = -18 * std::sin(s1 - s2) - 24 * c1 - 24 * c2;
  return b / (root * root);
}

double angle_between(const Transform& a, const Transform& b) {
  return rotation_angle(a.rotation.transpose() * b.rotation);
}

TEST(Connection, DefiningIdentity) {
  for_all(100, 1, [](Gen& g, std::size_t) {
    const Model m = testing::random_tree(g, g.index(2, 6));
    const VecX s = g.vecx(m.dof(), pi);
    const MassPartition mp = mass_partition(m, s);
    EXPECT_LE(max_abs(mp.locked * connection(m, s) - mp.coupling), 1e-10);
  });
}

TEST(Connection, NoJointsGivesEmptyMatrix) { EXPECT_EQ(connection(rigid_body(), VecX()).cols(), 0); }

TEST(Connection, ZeroOffsetColumnsAreParallelSpins) {
  const Model m = three_link(0.0);
  for_all(20, 2, [&](Gen& g, std::size_t) {
    const Mat6X a = connection(m, g.vecx(2, pi));
    for (int c = 0; c < 2; ++c) {
      EXPECT_LE(a.col(c).head<3>().norm(), 1e-14);
      EXPECT_LE(a.col(c).segment<2>(3).norm(), 1e-14);
    }
    EXPECT_NE(a(5, 0), 0.0);
    EXPECT_NEAR(a(5, 0), a(5, 1), 1e-14);
  });
}

TEST(Curvature, MatchesPublishedClosedForm) {
  const Model m = three_link(1.0);
  for_all(25, 3, [&](Gen& g, std::size_t) {
    const double s1 = g.uniform(-pi, pi), s2 = g.uniform(-pi, pi);
    const SpatialMotion b = curvature(m, (VecX(2) << s1, s2).finished(), 0, 1);
    EXPECT_LE((b.vector() - closed_form_b12(s1, s2)).norm(), 1e-7);
  });
}

TEST(Curvature, RegressionValueAtRest) {
  const SpatialMotion b = curvature(three_link(1.0), VecX::Zero(2), 0, 1);
  EXPECT_NEAR(b.vector().norm(), 0.0853385, 1e-7);
  EXPECT_GT(b.vector().norm(), 0.01);
}

TEST(Curvature, ZeroOffsetIsFlatEverywhere) {
  const Model m = three_link(0.0);
  for_all(50, 4, [&](Gen& g, std::size_t) {
    EXPECT_LE(curvature(m, g.vecx(2, pi), 0, 1).vector().norm(), 1e-7);
  });
}

TEST(Curvature, AntisymmetricAndBaseIndependent) {
  for_all(50, 5, [](Gen& g, std::size_t) {
    const Model m = testing::random_tree(g, g.index(3, 6));
    const VecX s = g.vecx(m.dof(), pi);
    const std::size_t i = g.index(0, m.dof() - 1), j = g.index(0, m.dof() - 1);
    const Vec6 bij = curvature(m, s, i, j).vector(), bji = curvature(m, s, j, i).vector();
    EXPECT_LE((bij + bji).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(curvature(m, s, i, i).vector(), Vec6::Zero());
    // Connection and curvature take the shape only; the locked inertia in B
    // recomputed through world-frame poses agrees up to rounding.
    const State a{g.transform(), s}, b{g.transform(), s};
    EXPECT_LE(max_abs(locked_inertia_at(m, a, FrameTag::kB) - locked_inertia_at(m, b, FrameTag::kB)), 1e-12);
    EXPECT_LE(max_abs(locked_inertia_at(m, a, FrameTag::kB) - mass_partition(m, s).locked), 1e-12);
  });
}

TEST(Curvature, RejectsBadArguments) {
  const Model m = three_link(1.0);
  EXPECT_THROW(curvature(m, VecX::Zero(2), 0, 2), std::out_of_range);
  EXPECT_THROW(curvature(m, VecX::Zero(2), 0, 1, 0.0), std::invalid_argument);
}

TEST(Grid, AxisAndOrdering) {
  const AxisRange r{-1.0, 1.0, 5};
  EXPECT_DOUBLE_EQ(r.at(0), -1.0);
  EXPECT_DOUBLE_EQ(r.at(2), 0.0);
  EXPECT_DOUBLE_EQ(r.at(4), 1.0);
  EXPECT_DOUBLE_EQ((AxisRange{0.3, 7.0, 1}).at(0), 0.3);

  const FlatnessGrid grid{{{0.0, 1.0, 2}, {10.0, 12.0, 3}}};
  EXPECT_EQ(grid.size(), 6u);
  EXPECT_EQ(grid.sample(0), (VecX(2) << 0.0, 10.0).finished());
  EXPECT_EQ(grid.sample(1), (VecX(2) << 0.0, 11.0).finished());
  EXPECT_EQ(grid.sample(3), (VecX(2) << 1.0, 10.0).finished());

  Gen g(6);
  Model tree = testing::random_tree(g, 6);
  const FlatnessGrid def = default_grid(tree, 7);
  ASSERT_EQ(def.axes.size(), tree.dof());
  for (std::size_t k = 0; k < tree.dof(); ++k) {
    const bool prismatic = tree.joints()[k].type == JointType::kPrismatic;
    EXPECT_DOUBLE_EQ(def.axes[k].hi, prismatic ? 1.0 : pi);
    EXPECT_DOUBLE_EQ(def.axes[k].lo, prismatic ? -1.0 : -pi);
    EXPECT_EQ(def.axes[k].count, 7u);
  }
}

TEST(Flatness, ThreeLinkDichotomy) {
  const FlatnessReport flat = flatness_report(three_link(0.0), default_grid(three_link(0.0)));
  EXPECT_TRUE(flat.flat);
  EXPECT_LE(flat.max_norm, 1e-7);
  ASSERT_EQ(flat.pairs.size(), 1u);

  const Model m1 = three_link(1.0);
  const FlatnessReport bent = flatness_report(m1, default_grid(m1));
  EXPECT_FALSE(bent.flat);
  EXPECT_GE(bent.max_norm, 0.01);
  EXPECT_NEAR(bent.max_norm, 0.154152, 1e-6);
  // The reported worst sample attains the maximum.
  EXPECT_DOUBLE_EQ(curvature(m1, bent.worst_sample, bent.worst_i, bent.worst_j, bent.h).vector().norm(),
                   bent.max_norm);
  EXPECT_EQ(bent.worst_sample, bent.grid.sample(bent.worst_index));
}

TEST(Flatness, VerdictFollowsTolerance) {
  const Model m = three_link(1.0);
  const FlatnessGrid grid = default_grid(m, 5);
  const FlatnessReport loose = flatness_report(m, grid, 1.0);
  EXPECT_TRUE(loose.flat);
  const FlatnessReport tight = flatness_report(m, grid, loose.max_norm * 0.5);
  EXPECT_FALSE(tight.flat);
  EXPECT_EQ(loose.max_norm, tight.max_norm);
}

TEST(Flatness, OneJointModelsAreFlat) {
  for_all(20, 7, [](Gen& g, std::size_t) {
    const Model m = testing::random_one_joint(g);
    const FlatnessReport r = flatness_report(m, default_grid(m, 5));
    EXPECT_TRUE(r.flat);
    EXPECT_EQ(r.max_norm, 0.0);
    EXPECT_TRUE(r.pairs.empty());
  });
}

TEST(Flatness, CoaxialChainsAreFlat) {
  for_all(5, 8, [](Gen& g, std::size_t) {
    const Model m = testing::random_coaxial(g, 3);
    const FlatnessReport r = flatness_report(m, default_grid(m, 5));
    EXPECT_TRUE(r.flat) << r.max_norm;
    EXPECT_EQ(r.pairs.size(), 3u);
  });
  EXPECT_TRUE(flatness_report(coaxial_chain(3), default_grid(coaxial_chain(3), 5)).flat);
}

TEST(Flatness, GenericTreesAreNotFlat) {
  for_all(5, 9, [](Gen& g, std::size_t) {
    const Model m = testing::random_tree(g, 3, false);
    EXPECT_FALSE(flatness_report(m, default_grid(m, 4)).flat);
  });
}

TEST(Flatness, ThreadCountDoesNotChangeReport) {
  Gen g(10);
  const Model m = testing::random_tree(g, 4, false);
  const FlatnessGrid grid = default_grid(m, 6);
  const FlatnessReport one = flatness_report(m, grid, 1e-7, 1e-4, 1);
  for (std::size_t threads : {2u, 3u, 7u}) {
    const FlatnessReport r = flatness_report(m, grid, 1e-7, 1e-4, threads);
    EXPECT_EQ(r.max_norm, one.max_norm);
    EXPECT_EQ(r.worst_index, one.worst_index);
    EXPECT_EQ(r.worst_i, one.worst_i);
    EXPECT_EQ(r.worst_j, one.worst_j);
    ASSERT_EQ(r.pairs.size(), one.pairs.size());
    for (std::size_t k = 0; k < r.pairs.size(); ++k) EXPECT_EQ(r.pairs[k].max_norm, one.pairs[k].max_norm);
  }
}

TEST(FrameFunction, ReturnsBaseAtZero) {
  Gen g(11);
  const Transform base = g.transform();
  const Model m = three_link(1.0);
  const FrameFunction f = construct_frame_function(m, 50, base);
  EXPECT_EQ(f(VecX::Zero(2)).matrix(), base.matrix());
  EXPECT_EQ(f.steps(), 50u);
  EXPECT_FALSE(f.reversed());
}

TEST(FrameFunction, PathIndependentWhenFlat) {
  const Model m = three_link(0.0);
  const FrameFunction fwd = construct_frame_function(m), rev = construct_frame_function(m, 200, Transform(), true);
  for_all(20, 12, [&](Gen& g, std::size_t) {
    const VecX s = g.vecx(2, pi);
    EXPECT_LE(max_abs(fwd(s).matrix() - rev(s).matrix()), 1e-8);
  });
}

TEST(FrameFunction, PathDependentWhenCurved) {
  const Model m = three_link(1.0);
  const FrameFunction fwd = construct_frame_function(m), rev = construct_frame_function(m, 200, Transform(), true);
  const VecX s = (VecX(2) << 2.0, -1.5).finished();
  EXPECT_GT(angle_between(fwd(s), rev(s)), 1e-3);
  const VecX residual = verify_frame_function(m, fwd, s);
  EXPECT_TRUE(residual.allFinite());
}

TEST(FrameFunction, TrivializedDerivativeIsConnection) {
  const Model m0 = three_link(0.0);
  const FrameFunction f0 = construct_frame_function(m0);
  for_all(50, 13, [&](Gen& g, std::size_t) {
    EXPECT_LE(verify_frame_function(m0, f0, g.vecx(2, pi)).maxCoeff(), 1e-5);
  });
  for_all(3, 14, [](Gen& g, std::size_t) {
    const Model m = testing::random_coaxial(g, 3);
    const FrameFunction f = construct_frame_function(m);
    for (int k = 0; k < 10; ++k) EXPECT_LE(verify_frame_function(m, f, g.vecx(3, pi)).maxCoeff(), 1e-5);
  });
  for_all(5, 15, [](Gen& g, std::size_t) {
    const Model m = testing::random_one_joint(g);
    const FrameFunction f = construct_frame_function(m);
    for (int k = 0; k < 10; ++k) EXPECT_LE(verify_frame_function(m, f, g.vecx(1, 1.0)).maxCoeff(), 1e-6);
  });
}

TEST(FrameFunction, ReproducesIntegratedCentroidalFrame) {
  // With a flat connection, H(t) F(s(t)) solves the centroidal frame ODE.
  const Model m = three_link(0.0);
  const ShapeTrajectory loop = ShapeTrajectory::Sinusoid(10.0);
  const Transform h0 = Transform(exp_so3(Vec3(0.2, -0.4, 0.9)), Vec3(0.5, 1.0, -2.0));
  const auto traj = prescribed_shape_motion(m, loop, h0, Vec6::Zero(), 1e-3);
  const Transform f0 = h0.inverse() * *traj.front().frame;
  const FrameFunction f = construct_frame_function(m, 200, f0);
  for (std::size_t k = 0; k < traj.size(); k += 250) {
    const Transform predicted = traj[k].state.base_pose * f(traj[k].state.shape);
    EXPECT_LE(angle_between(predicted, *traj[k].frame), 1e-5);
    EXPECT_LE((predicted.origin - traj[k].frame->origin).norm(), 1e-5);
  }
}

TEST(Holonomy, ThreeLinkSinusoid) {
  const ShapeTrajectory loop = ShapeTrajectory::Sinusoid(10.0);
  const HolonomyResult flat = holonomy(three_link(0.0), loop);
  EXPECT_LE(flat.angle, 1e-5);
  EXPECT_LE(flat.origin_distance, 1e-6);
  EXPECT_LE(flat.com_drift, 1e-6);

  const HolonomyResult bent = holonomy(three_link(1.0), loop, 1e-3, 100);
  EXPECT_GE(bent.angle, 0.05);
  EXPECT_NEAR(bent.angle, 0.5936103730444, 1e-9);
  EXPECT_LE(bent.com_drift, 1e-6);
  EXPECT_NEAR(bent.frames.back().t, 10.0, 1e-12);
}

TEST(Holonomy, RandomLoopsOnFlatModelsReturn) {
  const Model m = three_link(0.0);
  for_all(10, 16, [&](Gen& g, std::size_t) {
    const MatX amp = g.vecx(2, 2.0), phase = g.vecx(2, pi);
    const ShapeTrajectory loop = ShapeTrajectory::Fourier(g.vecx(2, 1.0), amp, phase, 2.0);
    EXPECT_LE(holonomy(m, loop, 2e-3, 50).angle, 1e-5);
  });
  for_all(10, 17, [](Gen& g, std::size_t) {
    const Model one = testing::random_one_joint(g);
    const ShapeTrajectory loop = ShapeTrajectory::Fourier(g.vecx(1), g.vecx(1, 2.0), g.vecx(1, pi), 1.0);
    const HolonomyResult r = holonomy(one, loop, 2e-3, 50);
    EXPECT_LE(r.angle, 1e-6);
    EXPECT_LE(r.origin_distance, 1e-6);
  });
}

TEST(Holonomy, ConstantLoopIsIdentity) {
  const HolonomyResult r = holonomy(three_link(1.0), ShapeTrajectory::Constant((VecX(2) << 0.3, 1.2).finished(), 1.0));
  EXPECT_EQ(r.angle, 0.0);
  EXPECT_EQ(r.origin_distance, 0.0);
}

TEST(Holonomy, RejectsOpenLoops) {
  const ShapeTrajectory open(
      2, 1.0, [](double t) { return VecX::Constant(2, t); }, [](double) { return VecX::Ones(2); });
  EXPECT_THROW(holonomy(three_link(1.0), open), std::invalid_argument);
}

TEST(SmallLoop, FlatModelHasNoDrift) {
  const Model m = three_link(0.0);
  for_all(5, 18, [&](Gen& g, std::size_t) {
    const SmallLoopResult r = small_loop_check(m, g.vecx(2, pi), 0, 1, 1e-2);
    EXPECT_LE(r.drift.vector().norm(), 1e-8);
    EXPECT_LE(r.predicted.vector().norm(), 1e-8);
  });
}

TEST(SmallLoop, MismatchDecaysFasterThanEpsilonSquared) {
  const Model m = three_link(1.0);
  auto ratio = [&](const VecX& s0) {
    const SmallLoopResult a = small_loop_check(m, s0, 0, 1, 1e-2);
    const SmallLoopResult b = small_loop_check(m, s0, 0, 1, 5e-3);
    // Leading term of the drift is the curvature.
    EXPECT_LE((a.drift.vector() - a.predicted.vector()).norm(), 0.1 * a.predicted.vector().norm());
    return a.mismatch / b.mismatch;
  };
  EXPECT_GE(ratio(VecX::Zero(2)), 4.0);
  for_all(5, 19, [&](Gen& g, std::size_t) { EXPECT_GE(ratio(g.vecx(2, pi)), 4.0); });
}

TEST(SmallLoop, RejectsDegenerateLoop) {
  EXPECT_THROW(small_loop_check(three_link(1.0), VecX::Zero(2), 1, 1, 1e-2), std::invalid_argument);
}

}  // namespace
}  // namespace ckit
