#include "centroidal_kit/kinematics.hpp"

namespace ckit {

Transform joint_motion(const JointSpec& joint, double q) {
  if (joint.type == JointType::kRevolute) return Transform::Rotation(exp_so3(joint.axis * q));
  return Transform::Translation(joint.axis * q);
}

SpatialMotion joint_subspace(const JointSpec& joint) {
  if (joint.type == JointType::kRevolute) return SpatialMotion(Vec3::Zero(), joint.axis);
  return SpatialMotion(joint.axis, Vec3::Zero());
}

std::vector<Transform> link_poses(const Model& model, const State& state) {
  std::vector<Transform> poses(model.link_count());
  poses[model.base_index()] = state.base_pose;
  for (std::size_t l : model.traversal()) {
    const auto j = model.parent_joint(l);
    if (!j) continue;
    const JointSpec& js = model.joints()[*j];
    poses[l] = poses[model.joint_parent_link(*j)] * js.origin() *
               joint_motion(js, state.shape[static_cast<Eigen::Index>(*j)]);
  }
  return poses;
}

std::vector<LinkPose> forward_kinematics(const Model& model, const State& state) {
  const auto poses = link_poses(model, state);
  std::vector<LinkPose> out;
  out.reserve(poses.size());
  for (std::size_t l = 0; l < poses.size(); ++l) {
    out.push_back(LinkPose{model.links()[l].name, poses[l]});
  }
  return out;
}

Transform link_pose(const Model& model, const State& state, std::string_view link) {
  const std::size_t idx = model.link_index(link);
  return link_poses(model, state)[idx];
}

MatX Jacobian::full() const {
  MatX j(6, 6 + shape_block.cols());
  j << base_block, shape_block;
  return j;
}

SpatialMotion Jacobian::apply(const VelocityState& nu) const {
  return SpatialMotion(Vec6(base_block * nu.base_velocity.vector() + shape_block * nu.shape_rate));
}

Jacobian frame_jacobian(const Model& model, const State& state, std::size_t link,
                        const Transform& offset, VelocityRepr repr) {
  const auto poses = link_poses(model, state);
  const Transform frame = poses[link] * offset;
  const Transform frame_inv = frame.inverse();

  Jacobian jac;
  jac.repr = VelocityRepr::kLeft;
  jac.base_block = motion_transform(frame_inv * state.base_pose);
  jac.shape_block = Mat6X::Zero(6, static_cast<Eigen::Index>(model.dof()));
  for (std::size_t j : model.support_joints(link)) {
    const Transform child = poses[model.joint_child_link(j)];
    jac.shape_block.col(static_cast<Eigen::Index>(j)) =
        transform_motion(frame_inv * child, joint_subspace(model.joints()[j])).vector();
  }
  if (repr != VelocityRepr::kLeft) {
    const Mat6 conv = velocity_conversion(VelocityRepr::kLeft, repr, frame);
    jac.base_block = conv * jac.base_block;
    jac.shape_block = conv * jac.shape_block;
    jac.repr = repr;
  }
  return jac;
}

Jacobian link_jacobian(const Model& model, const State& state, std::string_view link,
                       VelocityRepr repr) {
  return frame_jacobian(model, state, model.link_index(link), Transform::Identity(), repr);
}

Vec3 com(const Model& model, const State& state) {
  const auto poses = link_poses(model, state);
  Vec3 acc = Vec3::Zero();
  double mass = 0.0;
  for (std::size_t l = 0; l < poses.size(); ++l) {
    const auto& in = model.links()[l].inertia;
    acc += in.mass() * poses[l].apply(in.com());
    mass += in.mass();
  }
  return acc / mass;
}

Vec3 com_in_base(const Model& model, const VecX& shape) {
  return com(model, State{Transform::Identity(), shape});
}

namespace {

// Matrix mapping the left-trivialized velocity to `to`.
Mat6 from_left(VelocityRepr to, const Transform& h) {
  switch (to) {
    case VelocityRepr::kLeft:
      return Mat6::Identity();
    case VelocityRepr::kRight:
      return motion_transform(h);
    case VelocityRepr::kMixed:
      return motion_transform(Transform::Rotation(h.rotation));
  }
  return Mat6::Identity();
}

Mat6 to_left(VelocityRepr from, const Transform& h) {
  switch (from) {
    case VelocityRepr::kLeft:
      return Mat6::Identity();
    case VelocityRepr::kRight:
      return motion_transform(h.inverse());
    case VelocityRepr::kMixed:
      return motion_transform(Transform::Rotation(h.rotation.transpose()));
  }
  return Mat6::Identity();
}

}  // namespace

Mat6 velocity_conversion(VelocityRepr from, VelocityRepr to, const Transform& h) {
  if (from == to) return Mat6::Identity();
  return from_left(to, h) * to_left(from, h);
}

SpatialMotion convert_velocity(const SpatialMotion& v, VelocityRepr from, VelocityRepr to,
                               const Transform& h) {
  return SpatialMotion(Vec6(velocity_conversion(from, to, h) * v.vector()));
}

SpatialMotion right_trivialized_difference(const Transform& plus, const Transform& minus,
                                           const Transform& mid, double h) {
  const Mat4 d = (plus.matrix() - minus.matrix()) / (2.0 * h);
  return vee6(d * mid.inverse().matrix());
}

}  // namespace ckit
