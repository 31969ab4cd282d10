#pragma once

// Planar dual quaternions: unit-real-part 4-vectors [x0, x1, x2, x3] over the
// basis {1, k, i, j}. The real part [x0, x1] = [cos(theta/2), sin(theta/2)]
// encodes the rotation, the dual part [x2, x3] = 1/2 * t (x) r the translation.
// The set of such vectors is S^1 x R^2; x and -x describe the same motion.

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <utility>

namespace dqpgo {

/// sin(u)/u, smooth through zero.
template <typename Scalar>
Scalar sinc(Scalar u) {
  if (std::abs(u) < Scalar(1e-4)) {
    const Scalar u2 = u * u;
    return Scalar(1) - u2 / Scalar(6) * (Scalar(1) - u2 / Scalar(20) *
           (Scalar(1) - u2 / Scalar(42) * (Scalar(1) - u2 / Scalar(72))));
  }
  return std::sin(u) / u;
}

/// d/du sinc(u).
template <typename Scalar>
Scalar sincDerivative(Scalar u) {
  if (std::abs(u) < Scalar(1e-2)) {
    // -u/3 + u^3/30 - u^5/840 + u^7/45360
    const Scalar u2 = u * u;
    return -u / Scalar(3) * (Scalar(1) - u2 / Scalar(10) *
           (Scalar(1) - u2 / Scalar(28) * (Scalar(1) - u2 / Scalar(54))));
  }
  return (u * std::cos(u) - std::sin(u)) / (u * u);
}

template <typename Scalar>
using TangentVector = Eigen::Matrix<Scalar, 3, 1>;

/// A 4-vector expected to lie in the tangent plane of some base pose.
template <typename Scalar>
using AmbientTangentVector = Eigen::Matrix<Scalar, 4, 1>;

template <typename Scalar>
struct Pose2 {
  Scalar theta;
  Eigen::Matrix<Scalar, 2, 1> t;
};

template <typename Scalar_>
class PlanarDualQuaternion {
 public:
  using Scalar = Scalar_;
  using Coefficients = Eigen::Matrix<Scalar, 4, 1>;
  using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
  using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
  using Matrix4 = Eigen::Matrix<Scalar, 4, 4>;

  PlanarDualQuaternion() : coeffs_(Scalar(1), Scalar(0), Scalar(0), Scalar(0)) {}

  PlanarDualQuaternion(Scalar x0, Scalar x1, Scalar x2, Scalar x3)
      : coeffs_(x0, x1, x2, x3) {}

  template <typename Derived>
  explicit PlanarDualQuaternion(const Eigen::MatrixBase<Derived>& coeffs)
      : coeffs_(coeffs) {}

  static PlanarDualQuaternion Identity() { return PlanarDualQuaternion(); }

  static PlanarDualQuaternion FromPose(Scalar theta, const Vector2& t) {
    if (!std::isfinite(theta) || !t.allFinite()) {
      throw std::invalid_argument("FromPose: non-finite pose");
    }
    const Scalar r0 = std::cos(theta / 2);
    const Scalar r1 = std::sin(theta / 2);
    const Vector2 dual = Scalar(0.5) * rightRealMatrix(r0, r1) * t;
    return PlanarDualQuaternion(r0, r1, dual.x(), dual.y()).canonical();
  }

  const Coefficients& coeffs() const { return coeffs_; }
  Scalar operator[](int i) const { return coeffs_[i]; }

  auto real() const { return coeffs_.template head<2>(); }
  auto dual() const { return coeffs_.template tail<2>(); }

  /// Rotation angle in (-pi, pi].
  Scalar angle() const {
    const PlanarDualQuaternion c = canonical();
    return 2 * std::atan2(c[1], c[0]);
  }

  /// t = 2 * (Q_r^right)^-1 * x_s. The 2x2 factor is a rotation for unit r,
  /// so its inverse is its transpose and there is no singular angle.
  Vector2 translation() const {
    return 2 * rightRealMatrix(coeffs_[0], coeffs_[1]).transpose() * dual();
  }

  Pose2<Scalar> pose() const { return {angle(), translation()}; }

  /// Q^left(x): compose(x, y) == leftMatrix(x) * y.
  Matrix4 leftMatrix() const {
    const Scalar x0 = coeffs_[0], x1 = coeffs_[1], x2 = coeffs_[2], x3 = coeffs_[3];
    Matrix4 m;
    m << x0, -x1, 0, 0,
         x1, x0, 0, 0,
         x2, x3, x0, -x1,
         x3, -x2, x1, x0;
    return m;
  }

  /// Q^right(y): compose(x, y) == rightMatrix(y) * x.
  Matrix4 rightMatrix() const {
    const Scalar y0 = coeffs_[0], y1 = coeffs_[1], y2 = coeffs_[2], y3 = coeffs_[3];
    Matrix4 m;
    m << y0, -y1, 0, 0,
         y1, y0, 0, 0,
         y2, -y3, y0, y1,
         y3, y2, -y1, y0;
    return m;
  }

  /// diag(1, -1, -1, -1) * x.
  PlanarDualQuaternion conjugate() const {
    return PlanarDualQuaternion(coeffs_[0], -coeffs_[1], -coeffs_[2], -coeffs_[3]);
  }

  /// Equal to the conjugate on the unit manifold.
  PlanarDualQuaternion inverse() const { return conjugate(); }

  bool isCanonical() const {
    return coeffs_[0] > 0 || (coeffs_[0] == 0 && coeffs_[1] > 0);
  }

  /// Representative with x0 > 0, or x0 == 0 and x1 > 0.
  PlanarDualQuaternion canonical() const {
    return isCanonical() ? *this : -*this;
  }

  /// Scales the whole vector so that the real part has unit norm.
  PlanarDualQuaternion normalized() const {
    return PlanarDualQuaternion(Coefficients(coeffs_ / real().norm()));
  }

  PlanarDualQuaternion operator-() const {
    return PlanarDualQuaternion(Coefficients(-coeffs_));
  }

  /// Composition of rigid motions, renormalized and canonicalized.
  PlanarDualQuaternion operator*(const PlanarDualQuaternion& other) const {
    return PlanarDualQuaternion(Coefficients(leftMatrix() * other.coeffs_))
        .normalized()
        .canonical();
  }

  /// v' = x (+) [1, 0, v] (+) conj(x), where conj negates the quaternion
  /// vector part and the dual number part together: [x0, -x1, x2, x3].
  Vector2 transformPoint(const Vector2& v) const {
    const Coefficients point(Scalar(1), Scalar(0), v.x(), v.y());
    const Coefficients dual_conjugate(coeffs_[0], -coeffs_[1], coeffs_[2], coeffs_[3]);
    const Coefficients moved =
        PlanarDualQuaternion(dual_conjugate).rightMatrix() * (leftMatrix() * point);
    return moved.template tail<2>();
  }

  bool isApprox(const PlanarDualQuaternion& other,
                Scalar tolerance = Eigen::NumTraits<Scalar>::dummy_precision()) const {
    return (coeffs_ - other.coeffs_).cwiseAbs().maxCoeff() <= tolerance;
  }

 private:
  // Q_r^right restricted to the real block: [[r0, r1], [-r1, r0]].
  static Matrix2 rightRealMatrix(Scalar r0, Scalar r1) {
    Matrix2 q;
    q << r0, r1, -r1, r0;
    return q;
  }

  Coefficients coeffs_;
};

using PlanarDualQuaterniond = PlanarDualQuaternion<double>;
using TangentVectord = TangentVector<double>;
using AmbientTangentVectord = AmbientTangentVector<double>;
using Pose2d = Pose2<double>;

template <typename Scalar>
PlanarDualQuaternion<Scalar> fromPose(Scalar theta,
                                      const Eigen::Matrix<Scalar, 2, 1>& t) {
  return PlanarDualQuaternion<Scalar>::FromPose(theta, t);
}

template <typename Scalar>
Pose2<Scalar> toPose(const PlanarDualQuaternion<Scalar>& x) {
  return x.pose();
}

template <typename Scalar>
std::pair<Eigen::Matrix<Scalar, 4, 4>, Eigen::Matrix<Scalar, 4, 4>> productMatrices(
    const PlanarDualQuaternion<Scalar>& x) {
  return {x.leftMatrix(), x.rightMatrix()};
}

template <typename Scalar>
PlanarDualQuaternion<Scalar> compose(const PlanarDualQuaternion<Scalar>& x,
                                     const PlanarDualQuaternion<Scalar>& y) {
  return x * y;
}

template <typename Scalar>
PlanarDualQuaternion<Scalar> conjugate(const PlanarDualQuaternion<Scalar>& x) {
  return x.conjugate();
}

template <typename Scalar>
PlanarDualQuaternion<Scalar> inverse(const PlanarDualQuaternion<Scalar>& x) {
  return x.inverse();
}

template <typename Scalar>
PlanarDualQuaternion<Scalar> canonicalize(const PlanarDualQuaternion<Scalar>& x) {
  return x.canonical();
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> transformPoint(const PlanarDualQuaternion<Scalar>& x,
                                           const Eigen::Matrix<Scalar, 2, 1>& v) {
  return x.transformPoint(v);
}

/// Log at the identity: (1/gamma) [x1, x2, x3] with gamma = sinc(theta/2),
/// evaluated on the canonical representative so theta/2 lies in (-pi/2, pi/2].
template <typename Scalar>
TangentVector<Scalar> logIdentity(const PlanarDualQuaternion<Scalar>& x) {
  const auto c = x.canonical().coeffs();
  const Scalar half_angle = std::atan2(c[1], c[0]);
  return c.template tail<3>() / sinc(half_angle);
}

/// Exp at the identity: [cos(v1), gamma * v] with gamma = sinc(v1).
template <typename Scalar>
PlanarDualQuaternion<Scalar> expIdentity(const TangentVector<Scalar>& v) {
  const Scalar gamma = sinc(v[0]);
  return PlanarDualQuaternion<Scalar>(std::cos(v[0]), gamma * v[0], gamma * v[1],
                                      gamma * v[2])
      .normalized()
      .canonical();
}

/// P_x = blockdiag(I - x_r x_r^T, I).
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> tangentProjection(const PlanarDualQuaternion<Scalar>& x) {
  Eigen::Matrix<Scalar, 4, 4> p = Eigen::Matrix<Scalar, 4, 4>::Identity();
  const Eigen::Matrix<Scalar, 2, 1> r = x.real();
  p.template topLeftCorner<2, 2>() -= r * r.transpose();
  return p;
}

/// Orthonormal basis of the tangent plane: [-x1, x0, 0, 0], e3, e4.
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 3> tangentBasis(const PlanarDualQuaternion<Scalar>& x) {
  Eigen::Matrix<Scalar, 4, 3> b = Eigen::Matrix<Scalar, 4, 3>::Zero();
  b(0, 0) = -x[1];
  b(1, 0) = x[0];
  b(2, 1) = Scalar(1);
  b(3, 2) = Scalar(1);
  return b;
}

/// Log_x(y) = x (+) [0, Log_1(x^-1 (+) y)], an element of T_x.
template <typename Scalar>
AmbientTangentVector<Scalar> logAt(const PlanarDualQuaternion<Scalar>& x,
                                   const PlanarDualQuaternion<Scalar>& y) {
  AmbientTangentVector<Scalar> padded;
  padded << Scalar(0), logIdentity(x.inverse() * y);
  return x.leftMatrix() * padded;
}

/// Exp_x(v) = x (+) Exp_1((x^-1 (+) v)_{1:3}).
template <typename Scalar>
PlanarDualQuaternion<Scalar> expAt(const PlanarDualQuaternion<Scalar>& x,
                                   const AmbientTangentVector<Scalar>& v) {
  const AmbientTangentVector<Scalar> local = x.inverse().leftMatrix() * v;
  if (std::abs(local[0]) > Scalar(1e-9) * std::max(Scalar(1), v.norm())) {
    throw std::domain_error("expAt: vector is not in the tangent plane");
  }
  return x * expIdentity<Scalar>(local.template tail<3>());
}

}  // namespace dqpgo
