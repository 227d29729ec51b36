#pragma once

// Floating-base kinematic trees: description types, validation, the JSON
// model document and the built-in mechanisms.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "centroidal_kit/spatial.hpp"

namespace ckit {

/// Raised for malformed or structurally invalid models.  The message names
/// the offending element.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class JointType { kRevolute, kPrismatic };

std::string_view to_string(JointType type);
JointType joint_type_from_string(std::string_view name);

struct LinkSpec {
  std::string name;
  /// Expressed in the link frame, rotational part about the link frame origin.
  SpatialInertia inertia;
};

struct JointSpec {
  std::string name;
  std::string parent;
  std::string child;
  JointType type = JointType::kRevolute;
  /// Parent frame -> joint frame at zero displacement, as xyz + roll/pitch/yaw.
  /// Kept in this form so that serialization is lossless.
  Vec3 origin_xyz = Vec3::Zero();
  Vec3 origin_rpy = Vec3::Zero();
  /// Joint axis in the joint frame.
  Vec3 axis = Vec3::UnitZ();

  Transform origin() const { return Transform::FromXyzRpy(origin_xyz, origin_rpy); }
};

/// Immutable kinematic tree with a floating base link.  Joint order defines the
/// indexing of the shape vector s.
class Model {
 public:
  /// Throws ModelError on structural problems: duplicate names, joints
  /// referring to unknown links, cycles, links with two parent joints, links
  /// not connected to the base.
  Model(std::string base, std::vector<LinkSpec> links, std::vector<JointSpec> joints,
        Vec3 gravity = Vec3(0.0, 0.0, -9.81));

  const std::string& base_name() const { return base_; }
  const std::vector<LinkSpec>& links() const { return links_; }
  const std::vector<JointSpec>& joints() const { return joints_; }
  const Vec3& gravity() const { return gravity_; }

  std::size_t dof() const { return joints_.size(); }
  std::size_t link_count() const { return links_.size(); }
  std::size_t base_index() const { return base_index_; }
  double total_mass() const;

  /// Throws ModelError for unknown names.
  std::size_t link_index(std::string_view name) const;
  std::size_t joint_index(std::string_view name) const;

  /// Joint whose child is `link`; empty for the base link.
  std::optional<std::size_t> parent_joint(std::size_t link) const { return parent_joint_[link]; }
  std::size_t joint_parent_link(std::size_t joint) const { return joint_parent_[joint]; }
  std::size_t joint_child_link(std::size_t joint) const { return joint_child_[joint]; }
  /// Links ordered so that every parent precedes its children; starts at the base.
  const std::vector<std::size_t>& traversal() const { return traversal_; }
  /// Joint indices on the path base -> link, ordered from the base outwards.
  std::vector<std::size_t> support_joints(std::size_t link) const;
  /// True if joint `ancestor` lies on the path from the base to joint `j`
  /// (a joint is its own ancestor).
  bool joint_supports(std::size_t ancestor, std::size_t j) const;

  Model with_gravity(const Vec3& gravity) const;

 private:
  std::string base_;
  std::vector<LinkSpec> links_;
  std::vector<JointSpec> joints_;
  Vec3 gravity_;

  std::size_t base_index_ = 0;
  std::vector<std::optional<std::size_t>> parent_joint_;
  std::vector<std::size_t> joint_parent_;
  std::vector<std::size_t> joint_child_;
  std::vector<std::size_t> traversal_;
};

/// Base pose ^A H_B and joint displacements s (rad or m).
struct State {
  Transform base_pose;
  VecX shape;
};

/// Left-trivialized base velocity ^B v_{A,B} and joint rates.
struct VelocityState {
  SpatialMotion base_velocity;
  VecX shape_rate;
};

State zero_state(const Model& model);
VelocityState zero_velocity(const Model& model);

/// Numeric invariants that do not prevent construction: unit joint axes, SPD
/// link inertias, finite origins and gravity.  Empty means valid.
std::vector<std::string> validate(const Model& model);

/// Parses a JSON model document; throws ModelError on schema violations or any
/// invariant reported by validate().
Model parse_model(std::string_view text);
Model load_model_file(const std::string& path);
/// Serializes to the JSON document accepted by parse_model (lossless).
std::string serialize_model(const Model& model);

/// Planar three-body mechanism: a base link and two distal links attached by
/// revolute joints about +z at (-1, 0, 0) (joint1) and (+1, 0, 0) (joint2).
/// Each distal link has its center of mass at distance `d` from its joint axis
/// along the link x axis; both link frames are yawed by -pi/2, so at s = 0 the
/// distal links hang vertically with centers of mass at (-+1, -d, 0).
Model three_link(double d);
/// A single free rigid body (no joints).
Model rigid_body();
/// Serial chain of `n` links rotating about the common z axis, each with its
/// center of mass on the axis and an axisymmetric inertia.
Model coaxial_chain(std::size_t n);

/// Resolves `three-link:d=<v>`, `rigid-body`, `coaxial:n=<k>` or a file path.
Model resolve_model(const std::string& spec);

}  // namespace ckit
