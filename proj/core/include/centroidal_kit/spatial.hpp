#pragma once

// SE(3) and 6D spatial-vector algebra.
//
// Convention used across the library: every 6D quantity is stored
// linear-part first, i.e. a motion vector is (v; w) and a force vector is
// (f; tau).  A Transform ^A H_B maps coordinates expressed in B into A.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ckit {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// 6D motion vector (twist), linear part first.
class SpatialMotion {
 public:
  SpatialMotion() : data_(Vec6::Zero()) {}
  explicit SpatialMotion(const Vec6& data) : data_(data) {}
  SpatialMotion(const Vec3& linear, const Vec3& angular) {
    data_ << linear, angular;
  }

  static SpatialMotion Zero() { return SpatialMotion(); }

  Vec3 linear() const { return data_.head<3>(); }
  Vec3 angular() const { return data_.tail<3>(); }
  const Vec6& vector() const { return data_; }

  SpatialMotion operator+(const SpatialMotion& o) const {
    return SpatialMotion(Vec6(data_ + o.data_));
  }
  SpatialMotion operator-(const SpatialMotion& o) const {
    return SpatialMotion(Vec6(data_ - o.data_));
  }
  SpatialMotion operator*(double k) const { return SpatialMotion(Vec6(data_ * k)); }

 private:
  Vec6 data_;
};

inline SpatialMotion operator*(double k, const SpatialMotion& m) { return m * k; }

/// 6D force vector (wrench), force first then torque.
class SpatialForce {
 public:
  SpatialForce() : data_(Vec6::Zero()) {}
  explicit SpatialForce(const Vec6& data) : data_(data) {}
  SpatialForce(const Vec3& force, const Vec3& torque) { data_ << force, torque; }

  static SpatialForce Zero() { return SpatialForce(); }

  Vec3 linear() const { return data_.head<3>(); }
  Vec3 angular() const { return data_.tail<3>(); }
  const Vec6& vector() const { return data_; }

  SpatialForce operator+(const SpatialForce& o) const {
    return SpatialForce(Vec6(data_ + o.data_));
  }
  SpatialForce operator-(const SpatialForce& o) const {
    return SpatialForce(Vec6(data_ - o.data_));
  }

 private:
  Vec6 data_;
};

/// Duality pairing <f, v> (power).
inline double dot(const SpatialForce& f, const SpatialMotion& v) {
  return f.vector().dot(v.vector());
}

/// Rigid transformation; rotation is kept as a 3x3 matrix.
struct Transform {
  Mat3 rotation = Mat3::Identity();
  Vec3 origin = Vec3::Zero();

  Transform() = default;
  Transform(const Mat3& r, const Vec3& o) : rotation(r), origin(o) {}

  static Transform Identity() { return Transform(); }
  static Transform Translation(const Vec3& o) { return Transform(Mat3::Identity(), o); }
  static Transform Rotation(const Mat3& r) { return Transform(r, Vec3::Zero()); }
  /// Fixed-axis roll/pitch/yaw: R = Rz(yaw) Ry(pitch) Rx(roll).
  static Transform FromXyzRpy(const Vec3& xyz, const Vec3& rpy);
  static Transform FromMatrix(const Mat4& m);

  Transform operator*(const Transform& o) const {
    return Transform(rotation * o.rotation, rotation * o.origin + origin);
  }
  Transform inverse() const {
    Mat3 rt = rotation.transpose();
    return Transform(rt, -rt * origin);
  }
  Vec3 apply(const Vec3& p) const { return rotation * p + origin; }
  Mat4 matrix() const;

  /// Orthonormality and unit determinant within `tol`, finite origin.
  bool is_valid(double tol = 1e-12) const;
};

Mat3 hat3(const Vec3& w);
/// Throws std::invalid_argument if `m` is not skew-symmetric within `tol`.
Vec3 vee3(const Mat3& m, double tol = 1e-12);

/// [w^, v; 0, 0] for the twist (v; w).
Mat4 hat6(const SpatialMotion& v);
/// Inverse of hat6.  The angular part is read from the skew-symmetric part of
/// the upper-left block, so first-order finite-difference matrices are
/// accepted.  Throws std::invalid_argument if the bottom row is nonzero.
SpatialMotion vee6(const Mat4& m, double tol = 1e-12);

/// Rotation exp(w^) via Rodrigues' formula.
Mat3 exp_so3(const Vec3& w);
/// Rotation vector of `r` (principal log, angle in [0, pi]).
Vec3 log_so3(const Mat3& r);
/// Geodesic angle of a rotation, in [0, pi].
double rotation_angle(const Mat3& r);

/// Closed-form exponential of dt * v^ on SE(3).
Transform exp_se3(const SpatialMotion& v, double dt = 1.0);
/// Twist u with exp_se3(u) == h (principal branch).
SpatialMotion log_se3(const Transform& h);

/// ^A X_B = [R, o^ R; 0, R] for h = ^A H_B.
Mat6 motion_transform(const Transform& h);
/// _A X^B = [R, 0; o^ R, R] = (^A X_B)^{-T}.
Mat6 force_transform(const Transform& h);

SpatialMotion transform_motion(const Transform& h, const SpatialMotion& v);
SpatialForce transform_force(const Transform& h, const SpatialForce& f);

/// v x u = [w^, v^; 0, w^] u.
SpatialMotion cross6(const SpatialMotion& v, const SpatialMotion& u);
/// v x* f = [w^, 0; v^, w^] f.
SpatialForce crossdual6(const SpatialMotion& v, const SpatialForce& f);
Mat6 cross6_matrix(const SpatialMotion& v);
Mat6 crossdual6_matrix(const SpatialMotion& v);

/// Rigid-body inertia carried by a frame: mass, center of mass and rotational
/// inertia about the frame origin, all expressed in that frame.
class SpatialInertia {
 public:
  SpatialInertia() = default;
  /// The rotational inertia is symmetrized on construction.
  SpatialInertia(double mass, const Vec3& com, const Mat3& rot_inertia)
      : mass_(mass), com_(com), rot_inertia_(0.5 * (rot_inertia + rot_inertia.transpose())) {}

  /// Build from the rotational inertia about the center of mass.
  static SpatialInertia FromCentroidal(double mass, const Vec3& com, const Mat3& inertia_at_com);

  double mass() const { return mass_; }
  const Vec3& com() const { return com_; }
  const Mat3& rot_inertia() const { return rot_inertia_; }
  /// Rotational inertia about the center of mass.
  Mat3 centroidal_rot_inertia() const;

  /// [m 1, -m c^; m c^, I_o].
  Mat6 matrix() const;
  bool is_positive_definite() const;

  SpatialForce operator*(const SpatialMotion& v) const {
    return SpatialForce(Vec6(matrix() * v.vector()));
  }
  SpatialInertia operator+(const SpatialInertia& o) const;

 private:
  double mass_ = 0.0;
  Vec3 com_ = Vec3::Zero();
  Mat3 rot_inertia_ = Mat3::Zero();
};

/// Inertia re-expressed in the frame A, given h = ^A H_B for an inertia
/// carried by B: _A X^B M ^B X_A.
SpatialInertia inertia_to_frame(const SpatialInertia& m, const Transform& h);

}  // namespace ckit
