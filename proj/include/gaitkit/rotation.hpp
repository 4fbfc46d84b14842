#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

#include "gaitkit/error.hpp"

namespace gaitkit {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

/// Which of the two supplied axes is kept exactly; the other is
/// orthogonalized against it.
enum class AxisOrder { XPrimary, YPrimary };

/// Right-handed orthonormal frame [e_x e_y e_z] from a medio-lateral (x) and a
/// longitudinal (y) direction. e_z = e_x x e_y.
///
/// Throws DegenerateAxes when either input is zero or the two are within 1
/// degree of parallel.
template <typename DerivedX, typename DerivedY>
Mat3<typename DerivedX::Scalar> build_segment_frame(const Eigen::MatrixBase<DerivedX>& x_axis,
                                                    const Eigen::MatrixBase<DerivedY>& y_axis, AxisOrder order) {
  using Scalar = typename DerivedX::Scalar;
  const Scalar nx = x_axis.norm();
  const Scalar ny = y_axis.norm();
  if (!(nx > Scalar(1e-12)) || !(ny > Scalar(1e-12))) {
    throw GaitError(ErrorCode::DegenerateAxes, "zero-length segment axis");
  }
  const Vec3<Scalar> ux = x_axis / nx;
  const Vec3<Scalar> uy = y_axis / ny;
  const Scalar sin_angle = ux.cross(uy).norm();
  if (!(sin_angle > std::sin(Scalar(std::numbers::pi / 180.0)))) {
    throw GaitError(ErrorCode::DegenerateAxes, "segment axes are parallel");
  }
  Vec3<Scalar> ex;
  Vec3<Scalar> ey;
  if (order == AxisOrder::XPrimary) {
    ex = ux;
    ey = (uy - uy.dot(ex) * ex).normalized();
  } else {
    ey = uy;
    ex = (ux - ux.dot(ey) * ey).normalized();
  }
  Mat3<Scalar> frame;
  frame.col(0) = ex;
  frame.col(1) = ey;
  frame.col(2) = ex.cross(ey);
  return frame;
}

/// Distal orientation expressed in the proximal frame: R_p^T R_d.
template <typename DerivedP, typename DerivedD>
Mat3<typename DerivedP::Scalar> relative_rotation(const Eigen::MatrixBase<DerivedP>& proximal,
                                                  const Eigen::MatrixBase<DerivedD>& distal) {
  return proximal.transpose() * distal;
}

template <typename Scalar>
struct EulerXYZ {
  Scalar alpha = 0;  // about x: flexion/extension
  Scalar beta = 0;   // about y': ab/adduction
  Scalar gamma = 0;  // about z'': axial rotation
  bool gimbal_locked = false;
};

/// Within this many degrees of |beta| = 90 the decomposition reports gimbal
/// lock and sets gamma to zero.
inline constexpr double kGimbalToleranceDeg = 0.5;

/// Decomposes R = Rx(alpha) Ry(beta) Rz(gamma), angles in degrees with
/// alpha, gamma in (-180, 180] and beta in [-90, 90].
template <typename Derived>
EulerXYZ<typename Derived::Scalar> euler_xyz(const Eigen::MatrixBase<Derived>& r) {
  using Scalar = typename Derived::Scalar;
  using std::atan2;
  using std::sqrt;
  const Scalar to_deg = Scalar(180.0 / std::numbers::pi);
  auto wrap = [](Scalar a) { return a <= Scalar(-180) ? a + Scalar(360) : a; };

  EulerXYZ<Scalar> out;
  const Scalar cos_beta = sqrt(r(0, 0) * r(0, 0) + r(0, 1) * r(0, 1));
  out.beta = atan2(r(0, 2), cos_beta) * to_deg;
  if (Scalar(90) - std::abs(out.beta) < Scalar(kGimbalToleranceDeg)) {
    out.gimbal_locked = true;
    out.gamma = Scalar(0);
    out.alpha = wrap(atan2(r(2, 1), r(1, 1)) * to_deg);
  } else {
    out.alpha = wrap(atan2(-r(1, 2), r(2, 2)) * to_deg);
    out.gamma = wrap(atan2(-r(0, 1), r(0, 0)) * to_deg);
  }
  return out;
}

/// Rx(alpha) Ry(beta) Rz(gamma), angles in degrees.
template <typename Scalar>
Mat3<Scalar> compose_xyz(Scalar alpha_deg, Scalar beta_deg, Scalar gamma_deg) {
  const Scalar to_rad = Scalar(std::numbers::pi / 180.0);
  using Axis = Eigen::AngleAxis<Scalar>;
  return (Axis(alpha_deg * to_rad, Vec3<Scalar>::UnitX()) * Axis(beta_deg * to_rad, Vec3<Scalar>::UnitY()) *
          Axis(gamma_deg * to_rad, Vec3<Scalar>::UnitZ()))
      .toRotationMatrix();
}

template <typename Derived>
bool is_rotation(const Eigen::MatrixBase<Derived>& r, typename Derived::Scalar tol) {
  using Scalar = typename Derived::Scalar;
  return (r.transpose() * r - Mat3<Scalar>::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - Scalar(1)) <= tol;
}

}  // namespace gaitkit
