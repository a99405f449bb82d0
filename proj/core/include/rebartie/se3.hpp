#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <random>

namespace rebartie {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion kept in canonical form (w >= 0) so that q and -q, which
/// encode the same rotation, share one representation.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;  // identity
  /// Normalizes and canonicalizes; throws on a zero or non-finite input.
  UnitQuaternion(double w, double x, double y, double z);

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
  /// The rotation matrix must be orthonormal with det +1.
  static UnitQuaternion from_matrix(const Mat3& r);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  Vec3 vec() const { return {x_, y_, z_}; }

  UnitQuaternion conjugate() const;
  Mat3 matrix() const;
  Vec3 rotate(const Vec3& p) const;
  /// Rotation angle in [0, pi].
  double angle() const;

  friend UnitQuaternion operator*(const UnitQuaternion& a,
                                  const UnitQuaternion& b);

 private:
  double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
};

/// Canonical representative of q: normalized with w >= 0 (ties on w == 0
/// resolved by the first nonzero vector component being positive).
UnitQuaternion canonical(const UnitQuaternion& q);

struct Pose {
  UnitQuaternion rotation;
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }
  Pose inverse() const;
  Vec3 apply(const Vec3& p) const { return rotation.rotate(p) + translation; }
};

/// Lie-algebra element of se(3) in body coordinates.
struct Twist {
  Vec3 omega = Vec3::Zero();  // rotational part, radians
  Vec3 v = Vec3::Zero();      // translational part, meters

  bool is_finite() const { return omega.allFinite() && v.allFinite(); }
  Twist operator+(const Twist& o) const { return {omega + o.omega, v + o.v}; }
  Twist operator*(double s) const { return {omega * s, v * s}; }
};

Pose compose(const Pose& a, const Pose& b);

Pose exp_se3(const Twist& xi);
/// Principal-branch logarithm. Throws NearPiRotation when the rotation angle
/// is within 1e-6 of pi.
Twist log_se3(const Pose& g);

Mat3 skew(const Vec3& w);
/// Left Jacobian of SO(3).
Mat3 so3_left_jacobian(const Vec3& omega);
Mat3 so3_left_jacobian_inverse(const Vec3& omega);

enum class TranslationMetric {
  kEuclidean,  // ||p1 - p2||
  kSquared,    // ||p1 - p2||^2, literal reading of the printed formula
};

double angular_distance(const UnitQuaternion& q1, const UnitQuaternion& q2);
double translational_distance(const Vec3& p1, const Vec3& p2,
                              TranslationMetric metric =
                                  TranslationMetric::kEuclidean);
/// D_g = d_t + gamma * theta_q. Throws NegativeGamma when gamma < 0.
double pose_distance(const Pose& g1, const Pose& g2, double gamma,
                     TranslationMetric metric = TranslationMetric::kEuclidean);

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream index into an independent seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Brownian increment on se(3): omega ~ N(0, sigma_rot^2 dt I),
/// v ~ N(0, sigma_trans^2 dt I). Throws NonPositiveDt when dt <= 0.
Twist sample_wiener(double dt, double sigma_rot, double sigma_trans, Rng& rng);

}  // namespace rebartie
