#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tumble/geom.hpp"

using namespace tumble;

namespace {

Rotation random_rotation(std::mt19937_64& rng)
{
  std::normal_distribution<double> g(0.0, 1.0);
  return Rotation::from_quaternion(g(rng), g(rng), g(rng), g(rng));
}

}  // namespace

TEST(Rotation, ComposeWithIdentity)
{
  const Rotation r = Rotation::about_axis(Vec3(1, 2, 3), 0.7);
  EXPECT_MAT_NEAR(rotation_compose(Rotation::identity(), r).matrix(), r.matrix(), 1e-12);
}

TEST(Rotation, ComposeWithInverseIsIdentity)
{
  const Rotation r = Rotation::about_axis(Vec3(-1, 0.5, 2), 2.1);
  EXPECT_MAT_NEAR(rotation_compose(r, rotation_inverse(r)).matrix(), Mat3::Identity(), 1e-12);
}

TEST(Rotation, CoaxialAnglesAdd)
{
  const Rotation r = rotation_compose(Rotation::rz(30 * kDegToRad), Rotation::rz(60 * kDegToRad));
  EXPECT_MAT_NEAR(r.matrix(), Rotation::rz(90 * kDegToRad).matrix(), 1e-12);
}

TEST(Rotation, ComposeMatchesMatrixProduct)
{
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Rotation a = random_rotation(rng), b = random_rotation(rng);
    EXPECT_MAT_NEAR(rotation_compose(a, b).matrix(), a.matrix() * b.matrix(), 1e-12);
  }
}

TEST(Rotation, InverseCases)
{
  EXPECT_MAT_NEAR(rotation_inverse(Rotation::identity()).matrix(), Mat3::Identity(), 0.0);
  EXPECT_MAT_NEAR(rotation_inverse(Rotation::rz(0.4)).matrix(), Rotation::rz(-0.4).matrix(), 1e-15);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = random_rotation(rng);
    EXPECT_MAT_NEAR(rotation_inverse(r).matrix(), r.matrix().transpose(), 1e-12);
  }
}

TEST(Rotation, OrthonormalWithUnitDeterminant)
{
  std::mt19937_64 rng(3);
  Rotation acc;
  for (int i = 0; i < 1000; ++i) {
    acc = acc * random_rotation(rng);
    const Mat3 m = acc.matrix();
    ASSERT_NEAR(m.determinant(), 1.0, 1e-9);
    ASSERT_MAT_NEAR(m.transpose() * m, Mat3::Identity(), 1e-9);
    ASSERT_NEAR(acc.quaternion().norm(), 1.0, 1e-12);
  }
}

TEST(Rotation, Associativity)
{
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const Rotation a = random_rotation(rng), b = random_rotation(rng), c = random_rotation(rng);
    EXPECT_MAT_NEAR(((a * b) * c).matrix(), (a * (b * c)).matrix(), 1e-12);
  }
}

TEST(Rotation, CanonicalHemisphere)
{
  const Rotation r = Rotation::from_quaternion(-1, 0, 0, 0);
  EXPECT_EQ(r.quaternion().w(), 1.0);
  EXPECT_GE(Rotation::from_quaternion(-0.5, 0.5, -0.5, 0.5).quaternion().w(), 0.0);
}

TEST(Rotation, RejectsDegenerateQuaternions)
{
  EXPECT_THROW_KIND(Rotation::from_quaternion(0, 0, 0, 0), ErrorKind::InvalidArgument);
  EXPECT_THROW_KIND(Rotation::from_quaternion(NAN, 0, 0, 0), ErrorKind::InvalidArgument);
  EXPECT_THROW_KIND(Rotation::from_quaternion(1e308, 1e308, 0, 0), ErrorKind::InvalidArgument);
}

TEST(So3, LogOfIdentityIsZero) { EXPECT_VEC_NEAR(so3_log(Rotation::identity()), Vec3::Zero(), 0.0); }

TEST(So3, LogOfQuarterTurn)
{
  EXPECT_VEC_NEAR(so3_log(Rotation::rz(kPi / 2)), Vec3(0, 0, kPi / 2), 1e-15);
}

TEST(So3, SmallAngleRoundTrip)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    Vec3 v(u(rng), u(rng), u(rng));
    v *= std::pow(10.0, -4.0 - 8.0 * std::abs(u(rng)));  // down to 1e-12
    ASSERT_LT((so3_log(so3_exp(v)) - v).norm(), 1e-10);
  }
}

TEST(So3, RoundTripUpToNearlyPi)
{
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, kPi - 1e-3);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 v = Vec3(g(rng), g(rng), g(rng)).normalized() * angle(rng);
    ASSERT_LT((so3_log(so3_exp(v)) - v).norm(), 1e-9);
  }
}

TEST(So3, ExpReproducesRotation)
{
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Rotation r = random_rotation(rng);
    const Vec3 phi = so3_log(r);
    ASSERT_LE(phi.norm(), kPi + 1e-15);
    ASSERT_MAT_NEAR(so3_exp(phi).matrix(), r.matrix(), 1e-9);
  }
}

TEST(So3, LogAtPiReturnsEitherAxis)
{
  const Vec3 phi = so3_log(Rotation::about_axis(Vec3::UnitX(), kPi));
  EXPECT_NEAR(phi.norm(), kPi, 1e-12);
  EXPECT_NEAR(std::abs(phi.x()), kPi, 1e-12);
}

TEST(So3, SlerpEndpointsAndMidpoint)
{
  const Rotation a = Rotation::rz(0.2), b = Rotation::rz(1.0);
  EXPECT_MAT_NEAR(slerp(a, b, 0.0).matrix(), a.matrix(), 1e-15);
  EXPECT_MAT_NEAR(slerp(a, b, 1.0).matrix(), b.matrix(), 1e-14);
  EXPECT_MAT_NEAR(slerp(a, b, 0.5).matrix(), Rotation::rz(0.6).matrix(), 1e-14);
}

TEST(So3, SkewIsCrossProduct)
{
  const Vec3 a(1, -2, 3), b(0.5, 4, -1);
  EXPECT_VEC_NEAR(skew(a) * b, a.cross(b), 1e-15);
}

TEST(Pose, CenterFromTranslation)
{
  const Pose p = Pose::from_rotation_translation(Rotation::identity(), Vec3(0, 0, -5));
  EXPECT_VEC_NEAR(p.center, Vec3(0, 0, 5), 0.0);
  const Pose q = Pose::from_rotation_translation(Rotation::rz(kPi / 2), Vec3(1, 2, 3));
  EXPECT_VEC_NEAR(q.center, Vec3(-2, 1, -3), 1e-15);
  EXPECT_VEC_NEAR(q.rotation * q.center + Vec3(1, 2, 3), Vec3::Zero(), 1e-15);
  EXPECT_VEC_NEAR(q.translation(), Vec3(1, 2, 3), 1e-15);
}

TEST(Pose, ValidateRejectsBadTimestamps)
{
  Pose p;
  p.timestamp = -1.0;
  EXPECT_THROW_KIND(validate(p), ErrorKind::InvalidArgument);
  p.timestamp = INFINITY;
  EXPECT_THROW_KIND(validate(p), ErrorKind::InvalidArgument);
  p.timestamp = 0.0;
  EXPECT_NO_THROW(validate(p));
}

TEST(Geom, LineAngleIgnoresSign)
{
  EXPECT_NEAR(line_angle(Vec3::UnitX(), -Vec3::UnitX()), 0.0, 1e-15);
  EXPECT_NEAR(line_angle(Vec3::UnitX(), Vec3::UnitY()), kPi / 2, 1e-15);
}
