#include "p2c/randomization.hpp"

#include <cmath>

namespace p2c {

void RandomizationConfig::validate() const {
  auto check = [](const Range& r, const char* name) {
    if (!r.valid()) throw ConfigError(std::string("randomization range invalid: ") + name);
  };
  check(arm_stiffness_scale, "arm_stiffness_scale");
  check(arm_damping_scale, "arm_damping_scale");
  check(arm_initial_joint_offset, "arm_initial_joint_offset");
  check(hand_stiffness_scale, "hand_stiffness_scale");
  check(hand_damping_scale, "hand_damping_scale");
  check(mass_scale, "mass_scale");
  check(restitution, "restitution");
  check(throw_speed, "throw_speed");
  if (arm_action_noise_sigma < 0 || arm_obs_noise_sigma < 0 || hand_action_noise_sigma < 0 ||
      hand_obs_noise_sigma < 0)
    throw ConfigError("randomization: noise sigma must be >= 0");
  for (int i = 0; i < 3; ++i) {
    if (launch_box_lo[i] > launch_box_hi[i]) throw ConfigError("randomization: launch box inverted");
    if (aim_offset_lo[i] > aim_offset_hi[i]) throw ConfigError("randomization: aim offset inverted");
  }
  if (nominal_mass <= 0) throw ConfigError("randomization: nominal_mass must be > 0");
}

EpisodeParams EpisodeParams::nominal() {
  EpisodeParams p;
  p.arm_stiffness_scale = VecX::Ones(6);
  p.arm_damping_scale = VecX::Ones(6);
  p.hand_stiffness_scale = VecX::Ones(13);
  p.hand_damping_scale = VecX::Ones(13);
  p.initial_arm_offset = VecX::Zero(6);
  return p;
}

double parabola_closest_approach(const Vec3& p0, const Vec3& v0, const Vec3& point,
                                 double t_end) {
  const Vec3 g(0, 0, kGravityZ);
  auto dist2 = [&](double t) {
    const Vec3 p = p0 + v0 * t + 0.5 * g * t * t;
    return (p - point).squaredNorm();
  };
  // Dense scan then golden-section refinement around the best sample.
  const int samples = 400;
  double best_t = 0.0, best = dist2(0.0);
  for (int i = 1; i <= samples; ++i) {
    const double t = t_end * i / samples;
    const double d = dist2(t);
    if (d < best) {
      best = d;
      best_t = t;
    }
  }
  double a = std::max(0.0, best_t - t_end / samples);
  double b = std::min(t_end, best_t + t_end / samples);
  const double phi = 0.6180339887498949;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = dist2(x1), f2 = dist2(x2);
  for (int it = 0; it < 60; ++it) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - phi * (b - a); f1 = dist2(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + phi * (b - a); f2 = dist2(x2);
    }
  }
  return std::sqrt(std::min(f1, f2));
}

namespace {

Vec3 sample_box(Rng& rng, const Vec3& lo, const Vec3& hi) {
  Vec3 out;
  for (int i = 0; i < 3; ++i) out[i] = Range{lo[i], hi[i]}.sample(rng);
  return out;
}

Quat sample_orientation(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double u1 = u(rng), u2 = u(rng), u3 = u(rng);
  const double two_pi = 6.283185307179586;
  const double s1 = std::sqrt(1 - u1), s2 = std::sqrt(u1);
  return Quat(s2 * std::cos(two_pi * u3), s1 * std::sin(two_pi * u2),
              s1 * std::cos(two_pi * u2), s2 * std::sin(two_pi * u3))
      .normalized();
}

Vec3 perturb_direction(Rng& rng, const Vec3& v, double half_angle) {
  if (half_angle <= 0.0) return v;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec3 axis = Vec3(u(rng), u(rng), u(rng));
  if (axis.norm() < 1e-9) axis = Vec3::UnitX();
  axis = axis.cross(v);
  if (axis.norm() < 1e-9) axis = Vec3::UnitY();
  axis.normalize();
  const double angle = std::uniform_real_distribution<double>(0.0, half_angle)(rng);
  return Eigen::AngleAxisd(angle, axis) * v;
}

}  // namespace

ObjectState sample_throw(Rng& rng, const RandomizationConfig& cfg, const Vec3& workspace_center) {
  cfg.validate();
  for (int attempt = 0; attempt < cfg.max_throw_retries; ++attempt) {
    ObjectState obj;
    obj.position = sample_box(rng, cfg.launch_box_lo, cfg.launch_box_hi);
    obj.orientation = cfg.randomize_orientation ? sample_orientation(rng) : Quat::Identity();
    obj.mass = cfg.nominal_mass * cfg.mass_scale.sample(rng);
    obj.restitution = cfg.restitution.sample(rng);

    const Vec3 aim = workspace_center + sample_box(rng, cfg.aim_offset_lo, cfg.aim_offset_hi);
    const double speed = cfg.throw_speed.sample(rng);
    const Vec3 delta = aim - obj.position;
    const double flight_time = delta.norm() / std::max(speed, 1e-6);
    // Velocity that carries the analytic parabola through the aim point.
    Vec3 v = delta / flight_time + Vec3(0, 0, 0.5 * 9.81 * flight_time);
    v = perturb_direction(rng, v, cfg.direction_cone_half_angle);
    obj.linear_velocity = v;

    // Time until the parabola reaches the floor.
    const double vz = v.z(), z0 = obj.position.z();
    const double t_end = (vz + std::sqrt(vz * vz + 2 * 9.81 * z0)) / 9.81;
    if (parabola_closest_approach(obj.position, v, workspace_center, t_end) <=
        cfg.reachability_radius)
      return obj;
  }
  throw ConfigError("sample_throw: retry budget exhausted; throw ranges unreachable");
}

EpisodeParams randomize_episode(Rng& rng, const RandomizationConfig& cfg,
                                const JointChainModel& model) {
  cfg.validate();
  (void)model;
  EpisodeParams p = EpisodeParams::nominal();
  for (int i = 0; i < 6; ++i) {
    p.arm_stiffness_scale[i] = cfg.arm_stiffness_scale.sample(rng);
    p.arm_damping_scale[i] = cfg.arm_damping_scale.sample(rng);
    p.initial_arm_offset[i] = cfg.arm_initial_joint_offset.sample(rng);
  }
  for (int i = 0; i < 13; ++i) {
    p.hand_stiffness_scale[i] = cfg.hand_stiffness_scale.sample(rng);
    p.hand_damping_scale[i] = cfg.hand_damping_scale.sample(rng);
  }
  p.arm_action_noise_sigma = cfg.arm_action_noise_sigma;
  p.arm_obs_noise_sigma = cfg.arm_obs_noise_sigma;
  p.hand_action_noise_sigma = cfg.hand_action_noise_sigma;
  p.hand_obs_noise_sigma = cfg.hand_obs_noise_sigma;
  return p;
}

}  // namespace p2c
