#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "p2c/dynamics.hpp"
#include "p2c/kinematics.hpp"
#include "p2c/randomization.hpp"
#include "p2c/sysid.hpp"

#include <cmath>
#include <sstream>

using namespace p2c;

namespace {

// Independent FK oracle: plain 4x4 homogeneous-matrix chain.
Eigen::Matrix4d rot_about(const Vec3& axis, double angle) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  return m;
}

Eigen::Matrix4d translate(const Vec3& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topRightCorner<3, 1>() = t;
  return m;
}

Vec3 fk_oracle(const JointChainModel& model, const VecX& q) {
  Eigen::Matrix4d T = translate(model.base_position);
  T.topLeftCorner<3, 3>() = model.base_orientation.toRotationMatrix();
  for (int i = 0; i < 6; ++i) {
    const JointParams& j = model.arm_joints[static_cast<size_t>(i)];
    Eigen::Matrix4d off = translate(j.offset);
    off.topLeftCorner<3, 3>() = j.offset_orientation.toRotationMatrix();
    T = T * off * rot_about(j.axis, q[i]);
  }
  return (T * translate(model.palm_offset)).topRightCorner<3, 1>();
}

}  // namespace

TEST_CASE("forward kinematics at the all-zero configuration is the offset sum") {
  const JointChainModel model = make_default_model();
  JointState q(6);
  Vec3 expected = model.base_position;
  for (const JointParams& j : model.arm_joints) expected += j.offset;
  expected += model.palm_offset;
  const PalmPose palm = forward_kinematics(model, q);
  CHECK((palm.position - expected).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(palm.orientation.norm() - 1.0) < 1e-12);
}

TEST_CASE("base joint at pi negates x and y of the zero-pose palm position") {
  const JointChainModel model = make_default_model();
  JointState zero(6);
  const Vec3 home = forward_kinematics(model, zero).position;
  JointState q(6);
  q.positions[0] = 3.14159265358979323846;
  const Vec3 rotated = forward_kinematics(model, q).position;
  CHECK(rotated.x() == doctest::Approx(-home.x()).epsilon(1e-9));
  CHECK(rotated.y() == doctest::Approx(-home.y()).epsilon(1e-9));
  CHECK(rotated.z() == doctest::Approx(home.z()).epsilon(1e-9));
}

TEST_CASE("forward kinematics agrees with a homogeneous-matrix oracle") {
  const JointChainModel model = make_default_model();
  Rng rng(42);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    JointState q(6);
    for (int i = 0; i < 6; ++i) q.positions[i] = u(rng);
    const Vec3 got = forward_kinematics(model, q).position;
    const Vec3 want = fk_oracle(model, q.positions);
    CHECK((got - want).norm() < 1e-9);
  }
}

TEST_CASE("forward kinematics rejects wrong joint counts") {
  const JointChainModel model = make_default_model();
  CHECK_THROWS_AS(forward_kinematics(model, JointState(5)), DimensionError);
  CHECK_THROWS_AS(fingertip_positions(model, PalmPose{}, JointState(12)), DimensionError);
}

TEST_CASE("kinematics is rigid under a global base pre-transform") {
  JointChainModel model = make_default_model();
  Rng rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  JointState q(6);
  for (int i = 0; i < 6; ++i) q.positions[i] = u(rng);
  JointState qh(13);
  for (int i = 0; i < 13; ++i) qh.positions[i] = 0.4;

  const PalmPose palm_a = forward_kinematics(model, q);
  const auto tips_a = fingertip_positions(model, palm_a, qh);

  model.base_position = Vec3(0.3, -0.2, 1.0);
  model.base_orientation = Quat(Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()));
  const PalmPose palm_b = forward_kinematics(model, q);
  const auto tips_b = fingertip_positions(model, palm_b, qh);

  for (size_t i = 0; i < 4; ++i)
    for (size_t j = i + 1; j < 4; ++j)
      CHECK((tips_a[i] - tips_a[j]).norm() ==
            doctest::Approx((tips_b[i] - tips_b[j]).norm()).epsilon(1e-9));
  for (size_t i = 0; i < 4; ++i)
    CHECK((tips_a[i] - palm_a.position).norm() ==
          doctest::Approx((tips_b[i] - palm_b.position).norm()).epsilon(1e-9));
}

TEST_CASE("open-hand fingertips sit at the static chain offsets") {
  const JointChainModel model = make_default_model();
  PalmPose palm;  // identity
  const auto tips = fingertip_positions(model, palm, JointState(13));
  for (size_t f = 0; f < 4; ++f) {
    const FingerChain& chain = model.fingers[f];
    Vec3 expected = chain.base_offset;
    for (const JointParams& j : chain.joints) expected += j.offset;
    expected += chain.tip_offset;
    CHECK((tips[f] - expected).norm() < 1e-12);
  }
}

TEST_CASE("fully closed fingertips end up near the palm center") {
  const JointChainModel model = make_default_model();
  PalmPose palm;
  JointState qh(13);
  qh.positions = model.hand_limits_hi();
  const auto tips = fingertip_positions(model, palm, qh);
  for (const Vec3& tip : tips) CHECK((tip - palm.position).norm() < 0.08);
}

TEST_CASE("translating the palm translates every fingertip by the same vector") {
  const JointChainModel model = make_default_model();
  JointState qh(13);
  for (int i = 0; i < 13; ++i) qh.positions[i] = 0.3;
  PalmPose a;
  a.orientation = Quat(Eigen::AngleAxisd(0.9, Vec3(0, 1, 1).normalized()));
  PalmPose b = a;
  const Vec3 v(0.11, -0.22, 0.33);
  b.position += v;
  const auto tips_a = fingertip_positions(model, a, qh);
  const auto tips_b = fingertip_positions(model, b, qh);
  for (size_t i = 0; i < 4; ++i) CHECK((tips_b[i] - tips_a[i] - v).norm() < 1e-12);
}

TEST_CASE("step_joints holds an equilibrium state") {
  const JointChainModel model = make_default_model();
  JointState q(6);
  q.positions << 0.2, -0.3, 0.4, 0.1, -0.2, 0.3;
  const JointState next = step_joints(q, q.positions, model.arm_joints, 1.0 / 120.0);
  CHECK((next.positions - q.positions).norm() < 1e-15);
  CHECK(next.velocities.norm() < 1e-15);
}

TEST_CASE("step_joints one-step values match the hand recurrence") {
  // qdd = 100*(1-0) - 20*0 = 100; qd' = 100/120; q' = qd'/120
  std::vector<JointParams> joints(1);
  joints[0].stiffness = 100.0;
  joints[0].damping = 20.0;
  JointState q(1);
  VecX target = VecX::Constant(1, 1.0);
  const JointState next = step_joints(q, target, joints, 1.0 / 120.0);
  CHECK(next.velocities[0] == doctest::Approx(100.0 / 120.0).epsilon(1e-12));
  CHECK(next.positions[0] == doctest::Approx(100.0 / (120.0 * 120.0)).epsilon(1e-12));
}

TEST_CASE("undamped oscillator energy stays bounded over 1000 steps") {
  std::vector<JointParams> joints(1);
  joints[0].stiffness = 100.0;
  joints[0].damping = 0.0;
  joints[0].limit_lo = -10.0;
  joints[0].limit_hi = 10.0;
  JointState q(1);
  q.positions[0] = 0.5;
  const VecX target = VecX::Zero(1);
  auto energy = [&](const JointState& s) {
    return 0.5 * s.velocities[0] * s.velocities[0] +
           0.5 * 100.0 * s.positions[0] * s.positions[0];
  };
  const double e0 = energy(q);
  double max_e = e0;
  for (int i = 0; i < 1000; ++i) {
    q = step_joints(q, target, joints, 1.0 / 120.0);
    max_e = std::max(max_e, energy(q));
  }
  // Semi-implicit Euler keeps the discrete energy bounded (no blow-up).
  CHECK(max_e < 1.2 * e0);
}

TEST_CASE("step_joints clamps to limits and is deterministic") {
  std::vector<JointParams> joints(1);
  joints[0].stiffness = 400.0;
  joints[0].damping = 0.0;
  joints[0].limit_lo = -0.1;
  joints[0].limit_hi = 0.1;
  JointState q(1);
  const VecX target = VecX::Constant(1, 5.0);
  for (int i = 0; i < 200; ++i) {
    q = step_joints(q, target, joints, 1.0 / 120.0);
    CHECK(q.positions[0] <= 0.1 + 1e-15);
    CHECK(q.positions[0] >= -0.1 - 1e-15);
  }
  CHECK(q.positions[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(q.velocities[0] == 0.0);  // velocity zeroed at the clamp

  JointState a(1), b(1);
  a.positions[0] = b.positions[0] = 0.03;
  a.velocities[0] = b.velocities[0] = -0.4;
  const JointState ra = step_joints(a, target, joints, 1.0 / 120.0);
  const JointState rb = step_joints(b, target, joints, 1.0 / 120.0);
  CHECK(ra.positions[0] == rb.positions[0]);
  CHECK(ra.velocities[0] == rb.velocities[0]);
}

TEST_CASE("step_joints rejects non-finite targets") {
  const JointChainModel model = make_default_model();
  JointState q(6);
  VecX target = VecX::Zero(6);
  target[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(step_joints(q, target, model.arm_joints, 1.0 / 120.0));
}

TEST_CASE("object at rest on the table stays put with zero restitution") {
  ObjectState obj;
  obj.position = Vec3(0.2, 0.1, 0.81 + obj.half_extents.z());
  obj.restitution = 0.0;
  const ObjectStepResult r = step_object(obj, 1.0 / 120.0, 0.81);
  CHECK((r.state.position - obj.position).norm() < 1e-12);
  CHECK(r.state.linear_velocity.norm() < 1e-12);
}

TEST_CASE("one free-fall step matches the hand evaluation") {
  ObjectState obj;
  obj.position = Vec3(0, 0, 2.0);
  const ObjectStepResult r = step_object(obj, 1.0 / 120.0, 0.81);
  CHECK(r.state.linear_velocity.z() == doctest::Approx(-0.08175).epsilon(1e-12));
  CHECK(r.state.position.z() - 2.0 == doctest::Approx(-6.8125e-4).epsilon(1e-9));
  CHECK_FALSE(r.bounced);
}

TEST_CASE("N-step free flight matches the discrete closed form") {
  const double dt = 1.0 / 120.0;
  ObjectState obj;
  obj.position = Vec3(1.0, -0.5, 5.0);
  obj.linear_velocity = Vec3(-2.0, 0.7, 1.5);
  const Vec3 p0 = obj.position;
  const Vec3 v0 = obj.linear_velocity;
  const int N = 37;
  for (int i = 0; i < N; ++i) obj = step_object(obj, dt, -100.0).state;
  const Vec3 g(0, 0, kGravityZ);
  const Vec3 expected = p0 + N * dt * v0 + dt * dt * g * (N * (N + 1) / 2.0);
  CHECK((obj.position - expected).norm() < 1e-9);
  CHECK(obj.linear_velocity.x() == v0.x());  // horizontal components exact
  CHECK(obj.linear_velocity.y() == v0.y());
}

TEST_CASE("bounce reflects vertical velocity scaled by restitution") {
  ObjectState obj;
  obj.position = Vec3(0, 0, 0.81 + 0.05 + 1e-4);
  obj.linear_velocity = Vec3(0.5, 0, -2.0);
  obj.restitution = 0.5;
  const ObjectStepResult r = step_object(obj, 1.0 / 120.0, 0.81);
  CHECK(r.bounced);
  CHECK(r.state.linear_velocity.z() > 0.0);
  CHECK(r.state.linear_velocity.z() == doctest::Approx(0.5 * (2.0 + 9.81 / 120.0)).epsilon(1e-9));
  CHECK(r.state.position.z() >= 0.81 + 0.05 - 1e-12);
  CHECK(r.state.linear_velocity.x() == 0.5);
}

TEST_CASE("degenerate throw config collapses to the range midpoints") {
  RandomizationConfig cfg;
  cfg.launch_box_lo = cfg.launch_box_hi = Vec3(1.8, 0.0, 1.4);
  cfg.throw_speed = {3.0, 3.0};
  cfg.aim_offset_lo = cfg.aim_offset_hi = Vec3::Zero();
  cfg.mass_scale = {1.0, 1.0};
  cfg.restitution = {0.2, 0.2};
  cfg.randomize_orientation = false;
  cfg.reachability_radius = 10.0;
  Rng rng(3);
  const Vec3 center(0.5, 0.1, 1.35);
  const ObjectState a = sample_throw(rng, cfg, center);
  const ObjectState b = sample_throw(rng, cfg, center);
  CHECK((a.position - Vec3(1.8, 0.0, 1.4)).norm() < 1e-12);
  CHECK((a.position - b.position).norm() < 1e-12);
  CHECK((a.linear_velocity - b.linear_velocity).norm() < 1e-12);
  CHECK(a.mass == doctest::Approx(cfg.nominal_mass));
  CHECK(a.restitution == doctest::Approx(0.2));
}

TEST_CASE("throw samples respect the mass and restitution ranges") {
  RandomizationConfig cfg;
  Rng rng(11);
  const Vec3 center(0.5, 0.1, 1.35);
  double mass_lo = 1e9, mass_hi = -1e9, rest_lo = 1e9, rest_hi = -1e9;
  for (int i = 0; i < 10000; ++i) {
    const ObjectState o = sample_throw(rng, cfg, center);
    mass_lo = std::min(mass_lo, o.mass);
    mass_hi = std::max(mass_hi, o.mass);
    rest_lo = std::min(rest_lo, o.restitution);
    rest_hi = std::max(rest_hi, o.restitution);
    CHECK(std::abs(o.orientation.norm() - 1.0) < 1e-9);
  }
  CHECK(mass_lo >= 0.5 * cfg.nominal_mass);
  CHECK(mass_hi <= 1.5 * cfg.nominal_mass);
  CHECK(rest_lo >= 0.0);
  CHECK(rest_hi <= 0.5);
  // The ranges are actually exercised.
  CHECK(mass_hi - mass_lo > 0.05);
  CHECK(rest_hi - rest_lo > 0.2);
}

TEST_CASE("every accepted throw passes within the reachability radius") {
  RandomizationConfig cfg;
  Rng rng(17);
  const Vec3 center(0.5, 0.1, 1.35);
  for (int i = 0; i < 2000; ++i) {
    const ObjectState o = sample_throw(rng, cfg, center);
    const double d = parabola_closest_approach(o.position, o.linear_velocity, center, 3.0);
    CHECK(d <= cfg.reachability_radius + 1e-9);
  }
}

TEST_CASE("throw sampling is reproducible under equal seeds") {
  RandomizationConfig cfg;
  const Vec3 center(0.5, 0.1, 1.35);
  Rng a(99), b(99);
  for (int i = 0; i < 50; ++i) {
    const ObjectState x = sample_throw(a, cfg, center);
    const ObjectState y = sample_throw(b, cfg, center);
    CHECK((x.position - y.position).norm() == 0.0);
    CHECK((x.linear_velocity - y.linear_velocity).norm() == 0.0);
    CHECK(x.mass == y.mass);
  }
}

TEST_CASE("collapsed randomization ranges yield nominal episode parameters") {
  RandomizationConfig cfg;
  cfg.arm_stiffness_scale = cfg.arm_damping_scale = {1.0, 1.0};
  cfg.hand_stiffness_scale = cfg.hand_damping_scale = {1.0, 1.0};
  cfg.arm_initial_joint_offset = {0.0, 0.0};
  cfg.arm_action_noise_sigma = cfg.arm_obs_noise_sigma = 0.0;
  cfg.hand_action_noise_sigma = cfg.hand_obs_noise_sigma = 0.0;
  Rng rng(5);
  const EpisodeParams p = randomize_episode(rng, cfg, make_default_model());
  const EpisodeParams n = EpisodeParams::nominal();
  CHECK((p.arm_stiffness_scale - n.arm_stiffness_scale).norm() < 1e-12);
  CHECK((p.hand_damping_scale - n.hand_damping_scale).norm() < 1e-12);
  CHECK(p.initial_arm_offset.norm() < 1e-12);
  CHECK(p.arm_action_noise_sigma == 0.0);
}

TEST_CASE("episode randomization supports stay inside the documented ranges") {
  RandomizationConfig cfg;
  Rng rng(23);
  const JointChainModel model = make_default_model();
  double arm_k_lo = 1e9, arm_k_hi = -1e9, hand_d_lo = 1e9, hand_d_hi = -1e9;
  for (int i = 0; i < 10000; ++i) {
    const EpisodeParams p = randomize_episode(rng, cfg, model);
    arm_k_lo = std::min(arm_k_lo, p.arm_stiffness_scale.minCoeff());
    arm_k_hi = std::max(arm_k_hi, p.arm_stiffness_scale.maxCoeff());
    hand_d_lo = std::min(hand_d_lo, p.hand_damping_scale.minCoeff());
    hand_d_hi = std::max(hand_d_hi, p.hand_damping_scale.maxCoeff());
    CHECK(p.initial_arm_offset.minCoeff() >= -0.125);
    CHECK(p.initial_arm_offset.maxCoeff() <= 0.125);
  }
  CHECK(arm_k_lo >= 0.8);
  CHECK(arm_k_hi <= 1.2);
  CHECK(hand_d_lo >= 0.7);
  CHECK(hand_d_hi <= 1.3);
}

namespace {

std::vector<double> chirp_target(int steps) {
  std::vector<double> target(static_cast<size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double t = i / 120.0;
    target[static_cast<size_t>(i)] = 0.6 * std::sin(2.0 * t + 0.5 * t * t);
  }
  return target;
}

}  // namespace

TEST_CASE("sysid recovers known gain scales from clean data") {
  const JointChainModel model = make_default_model();
  const double dt = 1.0 / 120.0;
  std::vector<SysidTrajectory> recorded;
  for (int j = 0; j < 6; ++j)
    recorded.push_back(sysid_simulate(chirp_target(600), j, model, dt, 1.1, 0.9));
  const SysidResult fit = sysid_fit(recorded, model, dt);
  for (int j = 0; j < 6; ++j) {
    CHECK(std::abs(fit.stiffness_scale[j] / 1.1 - 1.0) < 0.05);
    CHECK(std::abs(fit.damping_scale[j] / 0.9 - 1.0) < 0.05);
  }
}

TEST_CASE("sysid at nominal scales is a zero-residual fixed point") {
  const JointChainModel model = make_default_model();
  const double dt = 1.0 / 120.0;
  std::vector<SysidTrajectory> recorded{sysid_simulate(chirp_target(400), 2, model, dt, 1.0, 1.0)};
  const SysidResult fit = sysid_fit(recorded, model, dt);
  CHECK(std::abs(fit.stiffness_scale[2] - 1.0) < 0.01);
  CHECK(std::abs(fit.damping_scale[2] - 1.0) < 0.01);
  CHECK(fit.residual_mse < 1e-10);
}

TEST_CASE("sysid stays within 10 percent under measurement noise") {
  const JointChainModel model = make_default_model();
  const double dt = 1.0 / 120.0;
  Rng rng(31);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<SysidTrajectory> recorded;
  for (int j = 0; j < 6; ++j) {
    SysidTrajectory t = sysid_simulate(chirp_target(600), j, model, dt, 1.1, 0.9);
    for (double& m : t.measured) m += noise(rng);
    recorded.push_back(std::move(t));
  }
  const SysidResult fit = sysid_fit(recorded, model, dt);
  for (int j = 0; j < 6; ++j) {
    CHECK(std::abs(fit.stiffness_scale[j] / 1.1 - 1.0) < 0.10);
    CHECK(std::abs(fit.damping_scale[j] / 0.9 - 1.0) < 0.10);
  }
}

TEST_CASE("sysid rejects empty and non-finite inputs") {
  const JointChainModel model = make_default_model();
  CHECK_THROWS(sysid_fit({}, model, 1.0 / 120.0));
  SysidTrajectory bad = sysid_simulate(chirp_target(50), 0, model, 1.0 / 120.0, 1.0, 1.0);
  bad.measured[10] = std::numeric_limits<double>::infinity();
  CHECK_THROWS(sysid_fit({bad}, model, 1.0 / 120.0));
}

TEST_CASE("sysid CSV round-trips and reports parse errors with row numbers") {
  const JointChainModel model = make_default_model();
  const double dt = 1.0 / 120.0;
  std::vector<SysidTrajectory> recorded{
      sysid_simulate(chirp_target(100), 1, model, dt, 1.05, 0.95),
      sysid_simulate(chirp_target(100), 4, model, dt, 1.05, 0.95)};
  std::ostringstream out;
  write_sysid_csv(out, recorded, dt);
  std::istringstream in(out.str());
  const auto parsed = read_sysid_csv(in);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].joint == 1);
  CHECK(parsed[1].joint == 4);
  for (size_t i = 0; i < recorded[0].measured.size(); ++i)
    CHECK(parsed[0].measured[i] == doctest::Approx(recorded[0].measured[i]).epsilon(1e-12));

  std::istringstream bad("t,joint,target,measured\n0.0,0,0.1,0.2\nnot-a-number,0,x,y\n");
  try {
    read_sysid_csv(bad);
    FAIL("expected a parse error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);  // row number
  }
  std::istringstream empty("");
  CHECK_THROWS(read_sysid_csv(empty));
}

TEST_CASE("sysid residual equals an independent MSE recomputation") {
  const JointChainModel model = make_default_model();
  const double dt = 1.0 / 120.0;
  std::vector<SysidTrajectory> recorded;
  for (int j = 0; j < 2; ++j)
    recorded.push_back(sysid_simulate(chirp_target(300), j, model, dt, 1.15, 0.85));
  const SysidResult fit = sysid_fit(recorded, model, dt);
  double total = 0.0;
  for (const SysidTrajectory& t : recorded)
    total += sysid_trajectory_mse(t, model.arm_joints[static_cast<size_t>(t.joint)], dt,
                                  fit.stiffness_scale[t.joint], fit.damping_scale[t.joint]);
  CHECK(fit.residual_mse == doctest::Approx(total / recorded.size()).epsilon(1e-9));
}
