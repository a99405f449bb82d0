#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rebartie/error.hpp"
#include "rebartie/se3.hpp"

namespace rebartie {
namespace {

constexpr double kPi = std::numbers::pi;

// Hamilton product written out by hand, independent of the library.
std::array<double, 4> hamilton(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

Vec3 random_vec(Rng& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

UnitQuaternion random_rotation(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng), n(rng), n(rng)};
}

Pose random_pose(Rng& rng) { return {random_rotation(rng), random_vec(rng, 2.0)}; }

// Rotation matrix from axis-angle via Rodrigues, as an oracle for exp.
Mat3 rodrigues(const Vec3& w) {
  const double th = w.norm();
  if (th == 0.0) return Mat3::Identity();
  const Vec3 k = w / th;
  Mat3 K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Mat3::Identity() + std::sin(th) * K + (1 - std::cos(th)) * K * K;
}

TEST(UnitQuaternion, NormalizesAndCanonicalizes) {
  const UnitQuaternion q(-2.0, 0.0, 0.0, 2.0);
  EXPECT_NEAR(q.w() * q.w() + q.z() * q.z(), 1.0, 1e-12);
  EXPECT_GE(q.w(), 0.0);
  EXPECT_NEAR(q.w(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(q.z(), -std::sqrt(0.5), 1e-12);
}

TEST(UnitQuaternion, RejectsZeroAndNonFinite) {
  EXPECT_THROW(UnitQuaternion(0, 0, 0, 0), Error);
  EXPECT_THROW(UnitQuaternion(NAN, 0, 0, 1), Error);
}

TEST(UnitQuaternion, CanonicalIsIdempotent) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const UnitQuaternion q = random_rotation(rng);
    const UnitQuaternion c1 = canonical(q), c2 = canonical(c1);
    EXPECT_EQ(c1.w(), c2.w());
    EXPECT_EQ(c1.x(), c2.x());
    EXPECT_EQ(c1.y(), c2.y());
    EXPECT_EQ(c1.z(), c2.z());
  }
  const UnitQuaternion half_turn(0.0, 0.0, -1.0, 0.0);
  EXPECT_EQ(half_turn.y(), 1.0);
}

TEST(UnitQuaternion, MatchesRotationMatrix) {
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Vec3 w = random_vec(rng, 2.0);
    const UnitQuaternion q = UnitQuaternion::from_axis_angle(w, w.norm());
    EXPECT_LT((q.matrix() - rodrigues(w)).norm(), 1e-12);
    const Vec3 p = random_vec(rng, 1.0);
    EXPECT_LT((q.rotate(p) - rodrigues(w) * p).norm(), 1e-12);
    const UnitQuaternion back = UnitQuaternion::from_matrix(q.matrix());
    EXPECT_LT(angular_distance(q, back), 1e-7);
  }
}

TEST(Exp, ZeroTwistIsIdentity) {
  const Pose g = exp_se3(Twist{});
  EXPECT_EQ(g.rotation.w(), 1.0);
  EXPECT_EQ(g.translation.norm(), 0.0);
}

TEST(Exp, PureRotationAboutZ) {
  const Pose g = exp_se3({Vec3(0, 0, kPi / 2), Vec3::Zero()});
  EXPECT_NEAR(g.rotation.w(), std::cos(kPi / 4), 1e-12);
  EXPECT_NEAR(g.rotation.z(), std::sin(kPi / 4), 1e-12);
  EXPECT_NEAR(g.translation.norm(), 0.0, 1e-15);
  EXPECT_NEAR(g.rotation.angle(), kPi / 2, 1e-12);
}

TEST(Exp, MatchesMatrixExponentialOracle) {
  // Oracle: exp of the 4x4 twist matrix via a long Taylor series.
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Twist xi{random_vec(rng, 1.5), random_vec(rng, 1.0)};
    Eigen::Matrix4d X = Eigen::Matrix4d::Zero();
    X.block<3, 3>(0, 0) << 0, -xi.omega.z(), xi.omega.y(), xi.omega.z(), 0, -xi.omega.x(),
        -xi.omega.y(), xi.omega.x(), 0;
    X.block<3, 1>(0, 3) = xi.v;
    Eigen::Matrix4d term = Eigen::Matrix4d::Identity(), sum = term;
    for (int k = 1; k < 60; ++k) {
      term = term * X / k;
      sum += term;
    }
    const Pose g = exp_se3(xi);
    EXPECT_LT((g.rotation.matrix() - sum.block<3, 3>(0, 0)).norm(), 1e-10);
    EXPECT_LT((g.translation - sum.block<3, 1>(0, 3)).norm(), 1e-10);
  }
}

TEST(ExpLog, RoundTripOverRandomTwists) {
  Rng rng(4);
  std::uniform_real_distribution<double> angle(0.0, kPi - 1e-3);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 axis = random_vec(rng, 1.0).normalized();
    const Twist xi{axis * angle(rng), random_vec(rng, 3.0)};
    const Twist back = log_se3(exp_se3(xi));
    EXPECT_LT((back.omega - xi.omega).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((back.v - xi.v).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ExpLog, SmallAngleBranch) {
  for (double th : {0.0, 1e-12, 1e-9, 5e-9, 2e-8, 1e-6}) {
    const Twist xi{Vec3(th, -th, 0.5 * th), Vec3(0.3, -0.2, 0.1)};
    const Twist back = log_se3(exp_se3(xi));
    EXPECT_LT((back.omega - xi.omega).norm(), 1e-12);
    EXPECT_LT((back.v - xi.v).norm(), 1e-12);
  }
}

TEST(Log, NearPiThrows) {
  const Pose g{UnitQuaternion::from_axis_angle(Vec3::UnitX(), kPi - 1e-8), Vec3::Zero()};
  try {
    log_se3(g);
    FAIL() << "expected NearPiRotation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNearPiRotation);
  }
  EXPECT_NO_THROW(log_se3({UnitQuaternion::from_axis_angle(Vec3::UnitX(), kPi - 1e-4), Vec3::Zero()}));
}

TEST(Log, ExpOfLogRecoversPose) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Pose g = random_pose(rng);
    if (g.rotation.angle() > kPi - 1e-3) continue;
    EXPECT_LT(pose_distance(exp_se3(log_se3(g)), g, 1.0), 1e-9);
  }
}

TEST(Jacobian, InverseIsInverse) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const Vec3 w = random_vec(rng, 2.5);
    EXPECT_LT((so3_left_jacobian(w) * so3_left_jacobian_inverse(w) - Mat3::Identity()).norm(),
              1e-10);
  }
}

TEST(Compose, IdentityAndInverse) {
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const Pose g = random_pose(rng);
    EXPECT_LT(pose_distance(compose(Pose::identity(), g), g, 1.0), 1e-12);
    EXPECT_LT(pose_distance(compose(g, Pose::identity()), g, 1.0), 1e-12);
    EXPECT_LT(pose_distance(compose(g, g.inverse()), Pose::identity(), 1.0), 1e-9);
  }
}

TEST(Compose, Associative) {
  Rng rng(8);
  for (int i = 0; i < 50; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    EXPECT_LT(pose_distance(compose(compose(a, b), c), compose(a, compose(b, c)), 1.0), 1e-9);
  }
}

TEST(Compose, TwoQuarterTurnsMakeHalfTurn) {
  const double h = std::sqrt(0.5);
  const auto expected = hamilton({h, 0, 0, h}, {h, 0, 0, h});  // (0, 0, 0, 1)
  const Pose q{UnitQuaternion(h, 0, 0, h), Vec3::Zero()};
  const Pose g = compose(q, q);
  EXPECT_NEAR(g.rotation.w(), expected[0], 1e-12);
  EXPECT_NEAR(g.rotation.z(), expected[3], 1e-12);
  EXPECT_NEAR(g.rotation.angle(), kPi, 1e-12);
}

TEST(Compose, MatchesHamiltonProduct) {
  Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const UnitQuaternion a = random_rotation(rng), b = random_rotation(rng);
    auto h = hamilton({a.w(), a.x(), a.y(), a.z()}, {b.w(), b.x(), b.y(), b.z()});
    const UnitQuaternion expected(h[0], h[1], h[2], h[3]);
    EXPECT_LT(angular_distance(a * b, expected), 1e-7);
  }
}

TEST(AngularDistance, Examples) {
  const UnitQuaternion id;
  const UnitQuaternion qz = UnitQuaternion::from_axis_angle(Vec3::UnitZ(), kPi / 2);
  EXPECT_EQ(angular_distance(qz, qz), 0.0);
  EXPECT_NEAR(angular_distance(id, qz), 2.0 * std::acos(std::cos(kPi / 4)), 1e-12);
  // q and -q: the constructor canonicalizes, so build -q by hand.
  const UnitQuaternion neg(-qz.w(), -qz.x(), -qz.y(), -qz.z());
  EXPECT_NEAR(angular_distance(qz, neg), 0.0, 1e-12);
}

TEST(AngularDistance, MetricProperties) {
  Rng rng(10);
  for (int i = 0; i < 1000; ++i) {
    const UnitQuaternion a = random_rotation(rng), b = random_rotation(rng),
                         c = random_rotation(rng);
    const double ab = angular_distance(a, b), bc = angular_distance(b, c),
                 ac = angular_distance(a, c);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, kPi + 1e-12);
    EXPECT_NEAR(ab, angular_distance(b, a), 1e-12);
    EXPECT_LE(ac, ab + bc + 1e-12);
  }
}

TEST(TranslationalDistance, Examples) {
  EXPECT_EQ(translational_distance(Vec3(1, 2, 3), Vec3(1, 2, 3)), 0.0);
  EXPECT_DOUBLE_EQ(translational_distance(Vec3::Zero(), Vec3(3, 4, 0)), 5.0);
  EXPECT_DOUBLE_EQ(translational_distance(Vec3::Zero(), Vec3(3, 4, 0), TranslationMetric::kSquared),
                   25.0);
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = random_vec(rng, 5.0), b = random_vec(rng, 5.0);
    EXPECT_EQ(translational_distance(a, b), translational_distance(b, a));
  }
}

TEST(PoseDistance, Examples) {
  Rng rng(12);
  const Pose g = random_pose(rng);
  EXPECT_EQ(pose_distance(g, g, 3.0), 0.0);
  const Pose h = random_pose(rng);
  EXPECT_DOUBLE_EQ(pose_distance(g, h, 0.0), (g.translation - h.translation).norm());
  const Pose target{UnitQuaternion::from_axis_angle(Vec3::UnitZ(), kPi / 2), Vec3(1, 0, 0)};
  EXPECT_NEAR(pose_distance(Pose::identity(), target, 1.0), 1.0 + kPi / 2, 1e-12);
  EXPECT_NEAR(pose_distance(g, h, 1.0), pose_distance(h, g, 1.0), 1e-12);
}

TEST(PoseDistance, NegativeGammaThrows) {
  try {
    pose_distance(Pose::identity(), Pose::identity(), -0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNegativeGamma);
  }
}

TEST(PoseDistance, InvariantUnderTranslationOnTheLeft) {
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng);
    const Pose h{UnitQuaternion::identity(), random_vec(rng, 4.0)};
    EXPECT_NEAR(pose_distance(a, b, 0.7), pose_distance(compose(h, a), compose(h, b), 0.7), 1e-9);
  }
}

TEST(Wiener, ZeroSigmasGiveZeroTwist) {
  Rng rng(14);
  const Twist t = sample_wiener(0.1, 0.0, 0.0, rng);
  EXPECT_EQ(t.omega.norm(), 0.0);
  EXPECT_EQ(t.v.norm(), 0.0);
}

TEST(Wiener, Deterministic) {
  Rng a(15), b(15);
  const Twist ta = sample_wiener(0.1, 0.3, 0.2, a), tb = sample_wiener(0.1, 0.3, 0.2, b);
  EXPECT_EQ(ta.omega, tb.omega);
  EXPECT_EQ(ta.v, tb.v);
}

TEST(Wiener, NonPositiveDtThrows) {
  Rng rng(16);
  for (double dt : {0.0, -1.0}) {
    try {
      sample_wiener(dt, 1.0, 1.0, rng);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNonPositiveDt);
    }
  }
}

TEST(Wiener, ComponentVarianceMatches) {
  Rng rng(17);
  const double dt = 0.05, sr = 0.4, st = 0.2;
  const int n = 10000;
  Eigen::Matrix<double, 6, 1> sum = Eigen::Matrix<double, 6, 1>::Zero(), sq = sum;
  for (int i = 0; i < n; ++i) {
    const Twist t = sample_wiener(dt, sr, st, rng);
    Eigen::Matrix<double, 6, 1> x;
    x << t.omega, t.v;
    sum += x;
    sq += x.cwiseProduct(x);
  }
  for (int k = 0; k < 6; ++k) {
    const double mean = sum[k] / n;
    const double var = sq[k] / n - mean * mean;
    const double expected = (k < 3 ? sr * sr : st * st) * dt;
    EXPECT_NEAR(var / expected, 1.0, 0.1) << "component " << k;
  }
}

TEST(DeriveSeed, DistinctStreams) {
  EXPECT_NE(derive_seed(0, 0), derive_seed(0, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(0, 1));
  EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
}

}  // namespace
}  // namespace rebartie
