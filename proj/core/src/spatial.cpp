#include "centroidal_kit/spatial.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ckit {

namespace {

constexpr double kSmallAngle = 1e-8;

// Coefficients of the SE(3) exponential for angle theta:
//   a = sin(t)/t, b = (1 - cos t)/t^2, c = (t - sin t)/t^3.
struct ExpCoefficients {
  double a, b, c;
};

ExpCoefficients exp_coefficients(double theta) {
  const double t2 = theta * theta;
  if (theta < kSmallAngle) {
    return {1.0 - t2 / 6.0, 0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0};
  }
  const double s = std::sin(theta);
  const double half = std::sin(0.5 * theta);
  ExpCoefficients k{s / theta, 2.0 * half * half / t2, 0.0};
  // t - sin t cancels catastrophically for small t.
  if (theta < 1e-3) {
    k.c = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    k.c = (theta - s) / (t2 * theta);
  }
  return k;
}

}  // namespace

Transform Transform::FromXyzRpy(const Vec3& xyz, const Vec3& rpy) {
  const Mat3 r = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                  Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                  Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                     .toRotationMatrix();
  return Transform(r, xyz);
}

Transform Transform::FromMatrix(const Mat4& m) {
  return Transform(m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>());
}

Mat4 Transform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = origin;
  return m;
}

bool Transform::is_valid(double tol) const {
  if (!rotation.allFinite() || !origin.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

Mat3 hat3(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Vec3 vee3(const Mat3& m, double tol) {
  const double sym = (m + m.transpose()).norm() * 0.5;
  if (!(sym <= tol)) {
    throw std::invalid_argument("vee3: matrix is not skew-symmetric");
  }
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

Mat4 hat6(const SpatialMotion& v) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = hat3(v.angular());
  m.topRightCorner<3, 1>() = v.linear();
  return m;
}

SpatialMotion vee6(const Mat4& m, double tol) {
  if (!(m.row(3).cwiseAbs().maxCoeff() <= tol)) {
    throw std::invalid_argument("vee6: bottom row of a twist matrix must be zero");
  }
  const Mat3 w = m.topLeftCorner<3, 3>();
  const Mat3 skew = 0.5 * (w - w.transpose());
  return SpatialMotion(m.topRightCorner<3, 1>(), Vec3(skew(2, 1), skew(0, 2), skew(1, 0)));
}

Mat3 exp_so3(const Vec3& w) {
  const double theta = w.norm();
  const auto k = exp_coefficients(theta);
  const Mat3 wh = hat3(w);
  return Mat3::Identity() + k.a * wh + k.b * wh * wh;
}

Vec3 log_so3(const Mat3& r) {
  const Vec3 axis_sin(0.5 * (r(2, 1) - r(1, 2)), 0.5 * (r(0, 2) - r(2, 0)),
                      0.5 * (r(1, 0) - r(0, 1)));
  const double s = axis_sin.norm();
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(s, c);
  if (theta < kSmallAngle) {
    return axis_sin * (1.0 + theta * theta / 6.0);
  }
  if (theta < std::numbers::pi - 1e-6) {
    return axis_sin * (theta / s);
  }
  // Near pi: recover the axis from the symmetric part,
  // (R + R^T) / 2 = c I + (1 - c) a a^T.
  const Mat3 b = (0.5 * (r + r.transpose()) - c * Mat3::Identity()) / (1.0 - c);
  Eigen::Index k = 0;
  b.diagonal().maxCoeff(&k);
  Vec3 a = b.col(k) / std::sqrt(std::max(b(k, k), 1e-300));
  a.normalize();
  if (a.dot(axis_sin) < 0.0) a = -a;
  return a * theta;
}

double rotation_angle(const Mat3& r) { return log_so3(r).norm(); }

Transform exp_se3(const SpatialMotion& v, double dt) {
  const Vec3 w = v.angular() * dt;
  const Vec3 u = v.linear() * dt;
  const double theta = w.norm();
  const auto k = exp_coefficients(theta);
  const Mat3 wh = hat3(w);
  const Mat3 wh2 = wh * wh;
  const Mat3 r = Mat3::Identity() + k.a * wh + k.b * wh2;
  const Mat3 vmat = Mat3::Identity() + k.b * wh + k.c * wh2;
  return Transform(r, vmat * u);
}

SpatialMotion log_se3(const Transform& h) {
  const Vec3 w = log_so3(h.rotation);
  const double theta = w.norm();
  const Mat3 wh = hat3(w);
  double d;
  if (theta < 1e-4) {
    d = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    const double half = 0.5 * theta;
    d = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  }
  const Mat3 vinv = Mat3::Identity() - 0.5 * wh + d * wh * wh;
  return SpatialMotion(vinv * h.origin, w);
}

Mat6 motion_transform(const Transform& h) {
  Mat6 x = Mat6::Zero();
  x.topLeftCorner<3, 3>() = h.rotation;
  x.topRightCorner<3, 3>() = hat3(h.origin) * h.rotation;
  x.bottomRightCorner<3, 3>() = h.rotation;
  return x;
}

Mat6 force_transform(const Transform& h) {
  Mat6 x = Mat6::Zero();
  x.topLeftCorner<3, 3>() = h.rotation;
  x.bottomLeftCorner<3, 3>() = hat3(h.origin) * h.rotation;
  x.bottomRightCorner<3, 3>() = h.rotation;
  return x;
}

SpatialMotion transform_motion(const Transform& h, const SpatialMotion& v) {
  const Vec3 w = h.rotation * v.angular();
  return SpatialMotion(h.rotation * v.linear() + h.origin.cross(w), w);
}

SpatialForce transform_force(const Transform& h, const SpatialForce& f) {
  const Vec3 force = h.rotation * f.linear();
  return SpatialForce(force, h.rotation * f.angular() + h.origin.cross(force));
}

SpatialMotion cross6(const SpatialMotion& v, const SpatialMotion& u) {
  const Vec3 w = v.angular();
  return SpatialMotion(w.cross(u.linear()) + v.linear().cross(u.angular()),
                       w.cross(u.angular()));
}

SpatialForce crossdual6(const SpatialMotion& v, const SpatialForce& f) {
  const Vec3 w = v.angular();
  return SpatialForce(w.cross(f.linear()), v.linear().cross(f.linear()) + w.cross(f.angular()));
}

Mat6 cross6_matrix(const SpatialMotion& v) {
  Mat6 m = Mat6::Zero();
  const Mat3 wh = hat3(v.angular());
  m.topLeftCorner<3, 3>() = wh;
  m.topRightCorner<3, 3>() = hat3(v.linear());
  m.bottomRightCorner<3, 3>() = wh;
  return m;
}

Mat6 crossdual6_matrix(const SpatialMotion& v) {
  Mat6 m = Mat6::Zero();
  const Mat3 wh = hat3(v.angular());
  m.topLeftCorner<3, 3>() = wh;
  m.bottomLeftCorner<3, 3>() = hat3(v.linear());
  m.bottomRightCorner<3, 3>() = wh;
  return m;
}

SpatialInertia SpatialInertia::FromCentroidal(double mass, const Vec3& com,
                                              const Mat3& inertia_at_com) {
  const Mat3 ch = hat3(com);
  return SpatialInertia(mass, com, inertia_at_com - mass * ch * ch);
}

Mat3 SpatialInertia::centroidal_rot_inertia() const {
  const Mat3 ch = hat3(com_);
  return rot_inertia_ + mass_ * ch * ch;
}

Mat6 SpatialInertia::matrix() const {
  Mat6 m;
  const Mat3 mc = mass_ * hat3(com_);
  m.topLeftCorner<3, 3>() = mass_ * Mat3::Identity();
  m.topRightCorner<3, 3>() = -mc;
  m.bottomLeftCorner<3, 3>() = mc;
  m.bottomRightCorner<3, 3>() = rot_inertia_;
  return m;
}

bool SpatialInertia::is_positive_definite() const {
  if (!(mass_ > 0.0) || !com_.allFinite() || !rot_inertia_.allFinite()) return false;
  if ((rot_inertia_ - rot_inertia_.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, rot_inertia_.cwiseAbs().maxCoeff())) {
    return false;
  }
  Eigen::LLT<Mat6> llt(matrix());
  return llt.info() == Eigen::Success;
}

SpatialInertia SpatialInertia::operator+(const SpatialInertia& o) const {
  const double m = mass_ + o.mass_;
  const Vec3 c = m > 0.0 ? Vec3((mass_ * com_ + o.mass_ * o.com_) / m) : Vec3::Zero();
  return SpatialInertia(m, c, rot_inertia_ + o.rot_inertia_);
}

SpatialInertia inertia_to_frame(const SpatialInertia& m, const Transform& h) {
  const Vec3 com = h.apply(m.com());
  const Mat3 ic = h.rotation * m.centroidal_rot_inertia() * h.rotation.transpose();
  return SpatialInertia::FromCentroidal(m.mass(), com, 0.5 * (ic + ic.transpose()));
}

}  // namespace ckit
