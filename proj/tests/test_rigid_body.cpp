#include <cmath>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tumble/rigid_body.hpp"

using namespace tumble;

namespace {

const InertiaModel kTopInertia(0.47, 0.47, 0.02);

SimConfig top_config()
{
  SimConfig c;
  c.inertia = kTopInertia;
  c.initial.omega = Vec3(0.0, 0.1, 1.0) * kDegToRad;
  c.initial.velocity = Vec3(0.0045, 0.0, 0.0);
  c.duration = 3000.0;
  c.sample_interval = 10.0;
  c.integrator_dt = 0.1;
  return c;
}

/// Closed-form transverse rate of a torque-free symmetric top.
Vec3 symmetric_top_omega(const Vec3& w0, double ixx, double izz, double t)
{
  const double lambda = (izz - ixx) / ixx * w0.z();
  const double c = std::cos(lambda * t), s = std::sin(lambda * t);
  return {w0.x() * c - w0.y() * s, w0.x() * s + w0.y() * c, w0.z()};
}

}  // namespace

TEST(Inertia, RejectsInvalidMoments)
{
  EXPECT_THROW_KIND(InertiaModel(0.0, 1.0, 1.0), ErrorKind::InvalidArgument);
  EXPECT_THROW_KIND(InertiaModel(-1.0, 1.0, 1.0), ErrorKind::InvalidArgument);
  EXPECT_THROW_KIND(InertiaModel(1.0, 1.0, 3.0), ErrorKind::InvalidArgument);
  EXPECT_THROW_KIND(InertiaModel(1.0, 1.0, 1.0, Vec3(NAN, 0, 0)), ErrorKind::InvalidArgument);
  EXPECT_NO_THROW(InertiaModel(1.0, 1.0, 2.0));
}

TEST(EulerDerivative, SpinAboutSymmetryAxisIsSteady)
{
  const InertiaModel inertia(2.0, 2.0, 1.0);
  EXPECT_VEC_NEAR(euler_derivative(Vec3(0, 0, 1), inertia), Vec3::Zero(), 0.0);
}

TEST(EulerDerivative, SymmetricTopMatchesFormula)
{
  const Vec3 w = Vec3(0.0, 0.1, 1.0) * kDegToRad;
  const double ixx = 0.47, iyy = 0.47, izz = 0.02;
  const Vec3 expected((iyy - izz) / ixx * w.y() * w.z(), (izz - ixx) / iyy * w.z() * w.x(),
                      (ixx - iyy) / izz * w.x() * w.y());
  EXPECT_VEC_NEAR(euler_derivative(w, kTopInertia), expected, 1e-18);
  EXPECT_GT(expected.x(), 0.0);
}

TEST(EulerDerivative, SphericalBodyHasNoCoupling)
{
  const InertiaModel sphere(3.0, 3.0, 3.0);
  EXPECT_VEC_NEAR(euler_derivative(Vec3(0.3, -2.0, 1.1), sphere), Vec3::Zero(), 1e-15);
}

TEST(EulerDerivative, TorqueDrivesRate)
{
  const InertiaModel inertia(2.0, 4.0, 5.0, Vec3(1.0, 2.0, 5.0));
  EXPECT_VEC_NEAR(euler_derivative(Vec3::Zero(), inertia), Vec3(0.5, 0.5, 1.0), 1e-15);
}

TEST(Rk4, ZeroRateOnlyAdvancesTime)
{
  RigidBodyState s;
  s.attitude = Rotation::about_axis(Vec3(1, 1, 0), 0.3);
  const auto next = rk4_step(s, kTopInertia, 0.5);
  EXPECT_EQ(next.time, 0.5);
  EXPECT_MAT_NEAR(next.attitude.matrix(), s.attitude.matrix(), 0.0);
  EXPECT_VEC_NEAR(next.omega, s.omega, 0.0);
  EXPECT_THROW_KIND(rk4_step(s, kTopInertia, 0.0), ErrorKind::InvalidArgument);
}

TEST(Rk4, CoaxialSpinMatchesClosedForm)
{
  const InertiaModel sphere(1.0, 1.0, 1.0);
  RigidBodyState s;
  const double w = 0.7;
  s.omega = Vec3(0, 0, w);
  const double T = 20.0;
  const auto end = propagate(s, sphere, T, 0.01);
  EXPECT_MAT_NEAR(end.attitude.matrix(), Rotation::rz(w * T).matrix(), 1e-9);
  EXPECT_DOUBLE_EQ(end.time, T);
}

TEST(Rk4, LinearMotionIsExact)
{
  RigidBodyState s;
  s.position = Vec3(1, 2, 3);
  s.velocity = Vec3(0.5, -1, 0);
  const auto end = propagate(s, kTopInertia, 4.0, 0.1);
  EXPECT_VEC_NEAR(end.position, Vec3(3, -2, 3), 1e-12);
}

TEST(Rk4, FourthOrderConvergence)
{
  const InertiaModel inertia(1.0, 2.0, 2.5);
  RigidBodyState s;
  s.omega = Vec3(0.4, 0.3, -0.5);
  const double T = 10.0;
  const auto reference = propagate(s, inertia, T, 0.002);
  const auto coarse = propagate(s, inertia, T, 0.2);
  const auto fine = propagate(s, inertia, T, 0.1);
  const double e_coarse = so3_log(coarse.attitude.inverse() * reference.attitude).norm();
  const double e_fine = so3_log(fine.attitude.inverse() * reference.attitude).norm();
  const double order = std::log2(e_coarse / e_fine);
  EXPECT_GE(order, 3.7) << e_coarse << " " << e_fine;
}

TEST(Simulate, TopScenarioSampleCount)
{
  const auto states = simulate(top_config());
  ASSERT_EQ(states.size(), 301u);
  EXPECT_EQ(states.front().time, 0.0);
  EXPECT_EQ(states.back().time, 3000.0);
  EXPECT_VEC_NEAR(states.back().position, Vec3(13.5, 0, 0), 1e-9);
}

TEST(Simulate, FramesOverrideDuration)
{
  auto c = top_config();
  c.frames = 300;
  const auto states = simulate(c);
  ASSERT_EQ(states.size(), 300u);
  EXPECT_EQ(states.back().time, 2990.0);
}

TEST(Simulate, ZeroMotionIsStatic)
{
  SimConfig c;
  c.duration = 10.0;
  c.sample_interval = 1.0;
  const auto states = simulate(c);
  ASSERT_EQ(states.size(), 11u);
  for (const auto& s : states) {
    EXPECT_MAT_NEAR(s.attitude.matrix(), Mat3::Identity(), 0.0);
    EXPECT_VEC_NEAR(s.position, Vec3::Zero(), 0.0);
  }
}

TEST(Simulate, RejectsInvalidConfig)
{
  auto c = top_config();
  c.integrator_dt = 20.0;
  EXPECT_THROW_KIND(simulate(c), ErrorKind::InvalidArgument);
  c = top_config();
  c.sample_interval = 4000.0;
  EXPECT_THROW_KIND(simulate(c), ErrorKind::InvalidArgument);
  c = top_config();
  c.integrator_dt = 0.0;
  EXPECT_THROW_KIND(simulate(c), ErrorKind::InvalidArgument);
  c = top_config();
  c.frames = 0;
  EXPECT_THROW_KIND(simulate(c), ErrorKind::InvalidArgument);
}

TEST(Simulate, ReportsNumericalBlowUp)
{
  SimConfig c;
  c.inertia = InertiaModel(1.0, 2.0, 2.5);
  c.initial.omega = Vec3(1e200, 1e200, 1e200);
  c.duration = 1.0;
  c.sample_interval = 1.0;
  EXPECT_THROW_KIND(simulate(c), ErrorKind::Numerical);
}

TEST(Simulate, SymmetricTopMatchesAnalyticSolution)
{
  const auto c = top_config();
  const auto states = simulate(c);
  double worst = 0.0;
  for (const auto& s : states) {
    const Vec3 expected = symmetric_top_omega(c.initial.omega, 0.47, 0.02, s.time);
    worst = std::max(worst, (s.omega - expected).norm());
  }
  EXPECT_LT(worst, 1e-12);
  EXPECT_LT(std::abs(states.back().omega.z() - c.initial.omega.z()), 1e-9);
}

TEST(Simulate, ConservesEnergyAndMomentum)
{
  const auto c = top_config();
  const auto states = simulate(c);
  const double e0 = c.inertia.kinetic_energy(c.initial.omega);
  const double h0 = c.inertia.angular_momentum(c.initial.omega).norm();
  for (const auto& s : states) {
    ASSERT_LT(std::abs(c.inertia.kinetic_energy(s.omega) - e0) / e0, 1e-8);
    ASSERT_LT(std::abs(c.inertia.angular_momentum(s.omega).norm() - h0) / h0, 1e-8);
  }
}

TEST(Simulate, InertialMomentumIsFixed)
{
  SimConfig c;
  c.inertia = InertiaModel(1.0, 2.0, 2.5);
  c.initial.omega = Vec3(0.4, 0.3, -0.5);
  c.duration = 50.0;
  c.sample_interval = 1.0;
  c.integrator_dt = 0.01;
  const auto states = simulate(c);
  const Vec3 h0 = c.inertia.angular_momentum(c.initial.omega);
  for (const auto& s : states) {
    ASSERT_VEC_NEAR(s.attitude * c.inertia.angular_momentum(s.omega), h0, 1e-8);
  }
}

TEST(CameraTrajectory, RestingTargetGivesIdenticalPoses)
{
  SimConfig c;
  c.duration = 5.0;
  const auto traj = to_camera_trajectory(simulate(c), Vec3(10, 0, 0));
  ASSERT_EQ(traj.size(), 6u);
  EXPECT_EQ(traj.frame_tag, FrameTag::Metric);
  for (const auto& p : traj.poses) {
    EXPECT_MAT_NEAR(p.rotation.matrix(), traj.poses[0].rotation.matrix(), 0.0);
    EXPECT_VEC_NEAR(p.center, Vec3(10, 0, 0), 0.0);
  }
}

TEST(CameraTrajectory, SpinMakesCenterCircleBackwards)
{
  SimConfig c;
  const double w = 0.1;
  c.initial.omega = Vec3(0, 0, w);
  c.duration = 20.0;
  c.integrator_dt = 0.01;
  const auto traj = to_camera_trajectory(simulate(c), Vec3(5, 0, 0));
  for (const auto& p : traj.poses) {
    const Vec3 expected = 5.0 * Vec3(std::cos(-w * p.timestamp), std::sin(-w * p.timestamp), 0);
    ASSERT_VEC_NEAR(p.center, expected, 1e-9);
  }
}

TEST(CameraTrajectory, IndependentFrameInversion)
{
  const auto c = top_config();
  const auto states = simulate(c);
  const Vec3 cam = c.camera_position_inertial;
  const auto traj = to_camera_trajectory(states, cam);
  const Mat3 C = look_at(cam, Vec3::Zero()).matrix();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Mat3 A = states[i].attitude.matrix();
    // a body point x maps to inertial A x + p, then to camera C (. - cam)
    const Vec3 x_body(0.03, -0.02, 0.05);
    const Vec3 via_truth = C * (A * x_body + states[i].position - cam);
    const Pose& p = traj.poses[i];
    ASSERT_VEC_NEAR(p.rotation * (x_body - p.center), via_truth, 1e-12);
    // the target drifts along the line of sight and stays centred
    const Vec3 origin_cam = p.rotation * (-p.center);
    ASSERT_NEAR(origin_cam.x(), 0.0, 1e-12);
    ASSERT_NEAR(origin_cam.y(), 0.0, 1e-12);
    ASSERT_GT(origin_cam.z(), 0.0);
  }
}

TEST(LookAt, ForwardAxisPointsAtTarget)
{
  const Rotation r = look_at(Vec3(3, 4, 0), Vec3::Zero());
  EXPECT_VEC_NEAR(r * Vec3(-3, -4, 0).normalized(), Vec3(0, 0, 1), 1e-15);
  const Rotation up = look_at(Vec3(0, 0, 5), Vec3::Zero());
  EXPECT_VEC_NEAR(up * Vec3(0, 0, -1), Vec3(0, 0, 1), 1e-15);
}

TEST(PoseNoise, ZeroSigmaIsIdentity)
{
  const auto traj = to_camera_trajectory(simulate(top_config()), Vec3(20, 0, 0));
  const auto same = inject_pose_noise(traj, 0.0, 0.0, 9);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    EXPECT_EQ(same.poses[i].center, traj.poses[i].center);
    EXPECT_EQ(same.poses[i].rotation.quaternion().coeffs(), traj.poses[i].rotation.quaternion().coeffs());
  }
  EXPECT_THROW_KIND(inject_pose_noise(traj, -1.0, 0.0, 1), ErrorKind::InvalidArgument);
}

TEST(PoseNoise, DeterministicPerSeed)
{
  const auto traj = to_camera_trajectory(simulate(top_config()), Vec3(20, 0, 0));
  const auto a = inject_pose_noise(traj, 0.05, 0.002, 42);
  const auto b = inject_pose_noise(traj, 0.05, 0.002, 42);
  const auto c = inject_pose_noise(traj, 0.05, 0.002, 43);
  EXPECT_EQ(write_trajectory_csv(a), write_trajectory_csv(b));
  EXPECT_NE(write_trajectory_csv(a), write_trajectory_csv(c));
}

TEST(PoseNoise, HalfNormalAngleStatistics)
{
  PoseTrajectory traj;
  for (int i = 0; i < 10000; ++i) traj.poses.push_back(Pose{Rotation::identity(), Vec3::Zero(), double(i)});
  const double sigma_deg = 0.05, sigma_t = 0.002;
  const auto noisy = inject_pose_noise(traj, sigma_deg, sigma_t, 123);
  double mean_angle = 0.0, mean_sq_offset = 0.0;
  for (const auto& p : noisy.poses) {
    mean_angle += so3_log(p.rotation).norm();
    mean_sq_offset += p.center.squaredNorm();
  }
  mean_angle /= 10000.0;
  mean_sq_offset /= 10000.0;
  const double expected = sigma_deg * kDegToRad * std::sqrt(2.0 / kPi);
  EXPECT_NEAR(mean_angle / expected, 1.0, 0.05);
  EXPECT_NEAR(mean_sq_offset / (3.0 * sigma_t * sigma_t), 1.0, 0.05);
}

TEST(TruthCsv, RoundTrip)
{
  const auto states = simulate(top_config());
  const std::string csv = write_truth_csv(states);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kTruthCsvHeader);
  const auto back = read_truth_csv(csv);
  ASSERT_EQ(back.size(), states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    ASSERT_NEAR(back[i].time, states[i].time, 1e-9);
    ASSERT_VEC_NEAR(back[i].omega, states[i].omega, 1e-10);  // 9 significant digits
    ASSERT_MAT_NEAR(back[i].attitude.matrix(), states[i].attitude.matrix(), 1e-8);
  }
}

TEST(TruthCsv, RejectsMalformedInput)
{
  EXPECT_THROW_KIND(read_truth_csv("time,qw\n"), ErrorKind::Schema);
  EXPECT_THROW_KIND(read_truth_csv(std::string(kTruthCsvHeader) + "\n1,2,3\n"), ErrorKind::Parse);
}
