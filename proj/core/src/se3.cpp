#include "rebartie/se3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rebartie/error.hpp"

namespace rebartie {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kNearPiRotation: return "NearPiRotation";
    case ErrorCode::kNegativeGamma: return "NegativeGamma";
    case ErrorCode::kNonPositiveDt: return "NonPositiveDt";
    case ErrorCode::kDegenerateAxis: return "DegenerateAxis";
    case ErrorCode::kSpecInvalid: return "SpecInvalid";
    case ErrorCode::kEmptyCloud: return "EmptyCloud";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kNoClusters: return "NoClusters";
    case ErrorCode::kAllZeroCounts: return "AllZeroCounts";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kNoNodesFound: return "NoNodesFound";
    case ErrorCode::kDegenerateCloud: return "DegenerateCloud";
    case ErrorCode::kAmbiguousAxis: return "AmbiguousAxis";
    case ErrorCode::kNonFiniteScore: return "NonFiniteScore";
    case ErrorCode::kEmptyCrop: return "EmptyCrop";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kNoCandidateNode: return "NoCandidateNode";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kConfig: return "Config";
  }
  return "Unknown";
}

namespace {

constexpr double kSmallAngle = 1e-8;
constexpr double kNearPiMargin = 1e-6;

}  // namespace

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kInvalidParams,
                "quaternion must be finite and nonzero");
  }
  w_ = w / n;
  x_ = x / n;
  y_ = y / n;
  z_ = z / n;
  bool flip = w_ < 0.0;
  if (w_ == 0.0) {
    flip = x_ < 0.0 || (x_ == 0.0 && (y_ < 0.0 || (y_ == 0.0 && z_ < 0.0)));
  }
  if (flip) {
    w_ = -w_;
    x_ = -x_;
    y_ = -y_;
    z_ = -z_;
  }
  if (w_ == 0.0) w_ = 0.0;  // drop negative zero
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis,
                                               double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) return identity();
  const Vec3 u = axis / n;
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), s * u.x(), s * u.y(), s * u.z()};
}

UnitQuaternion UnitQuaternion::from_matrix(const Mat3& r) {
  const Eigen::Quaterniond q(r);
  return {q.w(), q.x(), q.y(), q.z()};
}

UnitQuaternion UnitQuaternion::conjugate() const {
  return {w_, -x_, -y_, -z_};
}

Mat3 UnitQuaternion::matrix() const {
  return Eigen::Quaterniond(w_, x_, y_, z_).toRotationMatrix();
}

Vec3 UnitQuaternion::rotate(const Vec3& p) const {
  const Vec3 u = vec();
  const Vec3 t = 2.0 * u.cross(p);
  return p + w_ * t + u.cross(t);
}

double UnitQuaternion::angle() const {
  return 2.0 * std::atan2(vec().norm(), std::abs(w_));
}

UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
  return {a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
          a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
          a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
          a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_};
}

UnitQuaternion canonical(const UnitQuaternion& q) {
  return q;  // the constructor already canonicalizes
}

Pose Pose::inverse() const {
  const UnitQuaternion inv = rotation.conjugate();
  return {inv, -inv.rotate(translation)};
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.rotation * b.rotation, a.translation + a.rotation.rotate(b.translation)};
}

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 k = skew(omega);
  double a, b;
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    a = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
    b = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
  } else {
    const double s = std::sin(0.5 * theta);
    a = 2.0 * s * s / (theta * theta);
    b = (theta - std::sin(theta)) / (theta * theta * theta);
  }
  return Mat3::Identity() + a * k + b * k * k;
}

Mat3 so3_left_jacobian_inverse(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 k = skew(omega);
  double c;
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    c = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    const double half = 0.5 * theta;
    // 1/theta^2 * (1 - (theta/2) cot(theta/2))
    c = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  }
  return Mat3::Identity() - 0.5 * k + c * k * k;
}

Pose exp_se3(const Twist& xi) {
  const double theta = xi.omega.norm();
  UnitQuaternion q;
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    // sin(theta/2)/theta and cos(theta/2), 4th order
    const double s = 0.5 - t2 / 48.0 + t2 * t2 / 3840.0;
    const double c = 1.0 - t2 / 8.0 + t2 * t2 / 384.0;
    q = UnitQuaternion(c, s * xi.omega.x(), s * xi.omega.y(),
                       s * xi.omega.z());
  } else {
    q = UnitQuaternion::from_axis_angle(xi.omega, theta);
  }
  return {q, so3_left_jacobian(xi.omega) * xi.v};
}

Twist log_se3(const Pose& g) {
  const UnitQuaternion& q = g.rotation;
  const Vec3 u = q.vec();
  const double s = u.norm();
  const double theta = 2.0 * std::atan2(s, q.w());
  if (std::numbers::pi - theta < kNearPiMargin) {
    throw Error(ErrorCode::kNearPiRotation,
                "rotation angle within 1e-6 of pi; logarithm ill-conditioned");
  }
  Vec3 omega;
  if (theta < kSmallAngle) {
    const double t2 = theta * theta;
    // theta / sin(theta/2), 4th order
    omega = u * (2.0 + t2 / 12.0 + 7.0 * t2 * t2 / 2880.0);
  } else {
    omega = u * (theta / s);
  }
  return {omega, so3_left_jacobian_inverse(omega) * g.translation};
}

double angular_distance(const UnitQuaternion& q1, const UnitQuaternion& q2) {
  // 2 acos(|real(q1 q2*)|), evaluated through atan2 for accuracy near 0. The
  // product is expanded by hand (no renormalization) so q1 == q2 gives 0 exactly.
  const Vec3 v1 = q1.vec(), v2 = q2.vec();
  const double w = q1.w() * q2.w() + v1.dot(v2);
  const Vec3 v = q2.w() * v1 - q1.w() * v2 - v1.cross(v2);
  return 2.0 * std::atan2(v.norm(), std::abs(w));
}

double translational_distance(const Vec3& p1, const Vec3& p2,
                              TranslationMetric metric) {
  const double n = (p1 - p2).norm();
  return metric == TranslationMetric::kSquared ? n * n : n;
}

double pose_distance(const Pose& g1, const Pose& g2, double gamma,
                     TranslationMetric metric) {
  if (gamma < 0.0 || std::isnan(gamma)) {
    throw Error(ErrorCode::kNegativeGamma, "gamma must be >= 0");
  }
  return translational_distance(g1.translation, g2.translation, metric) +
         gamma * angular_distance(g1.rotation, g2.rotation);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(base ^ mix(stream));
}

Twist sample_wiener(double dt, double sigma_rot, double sigma_trans, Rng& rng) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kNonPositiveDt, "dt must be > 0");
  }
  if (sigma_rot < 0.0 || sigma_trans < 0.0) {
    throw Error(ErrorCode::kInvalidParams, "noise scales must be >= 0");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sr = sigma_rot * std::sqrt(dt);
  const double st = sigma_trans * std::sqrt(dt);
  Twist out;
  // Always draw six variates so the stream position is independent of sigma.
  for (int i = 0; i < 3; ++i) out.omega[i] = sr * normal(rng);
  for (int i = 0; i < 3; ++i) out.v[i] = st * normal(rng);
  return out;
}

}  // namespace rebartie
