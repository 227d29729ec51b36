#pragma once

#include <string_view>
#include <vector>

#include "centroidal_kit/model.hpp"

namespace ckit {

/// Velocity representation of a frame velocity (see convert_velocity).
///   kLeft:  body velocity ^B v_{A,B}
///   kRight: spatial velocity ^A v_{A,B}
///   kMixed: ^{B[A]} v_{A,B}, origin velocity and angular velocity in A
enum class VelocityRepr { kLeft, kRight, kMixed };

struct LinkPose {
  std::string_view link;
  Transform pose;  // ^A H_L
};

/// ^A H_L for every link, indexed like Model::links().
std::vector<Transform> link_poses(const Model& model, const State& state);
/// Same, paired with link names.
std::vector<LinkPose> forward_kinematics(const Model& model, const State& state);
/// Throws ModelError for an unknown link.
Transform link_pose(const Model& model, const State& state, std::string_view link);

/// Displacement transform of a single joint: rotation about / translation
/// along the joint axis.
Transform joint_motion(const JointSpec& joint, double q);
/// Motion subspace of a joint in its child frame.
SpatialMotion joint_subspace(const JointSpec& joint);

/// Velocity Jacobian of a frame rigidly attached to a link, split into the
/// base block ^i X (6x6) and the shape block ^i S (6 x n_J).
struct Jacobian {
  Mat6 base_block;
  Mat6X shape_block;
  VelocityRepr repr = VelocityRepr::kLeft;

  MatX full() const;
  SpatialMotion apply(const VelocityState& nu) const;
};

Jacobian frame_jacobian(const Model& model, const State& state, std::size_t link,
                        const Transform& offset, VelocityRepr repr);
Jacobian link_jacobian(const Model& model, const State& state, std::string_view link,
                       VelocityRepr repr);

/// ^A p_com.
Vec3 com(const Model& model, const State& state);
/// ^B p_com; depends on the shape only.
Vec3 com_in_base(const Model& model, const VecX& shape);

/// Converts the velocity of a frame with pose `h` = ^A H_B between
/// representations.
SpatialMotion convert_velocity(const SpatialMotion& v, VelocityRepr from, VelocityRepr to,
                               const Transform& h);
/// 6x6 matrix M with v_to = M v_from for convert_velocity.
Mat6 velocity_conversion(VelocityRepr from, VelocityRepr to, const Transform& h);

/// Right-trivialized central difference (a(+) - a(-)) / (2h) * mid^{-1},
/// read through vee6.  Used to check Jacobians and trivialized derivatives.
SpatialMotion right_trivialized_difference(const Transform& plus, const Transform& minus,
                                           const Transform& mid, double h);

}  // namespace ckit
