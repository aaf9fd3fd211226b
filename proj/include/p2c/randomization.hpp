#pragma once

#include "p2c/kinematics.hpp"
#include "p2c/types.hpp"

#include <random>

namespace p2c {

using Rng = std::mt19937_64;

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool valid() const { return lo <= hi; }
  double sample(Rng& rng) const {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
};

// All Table-I rows plus the throw-sampling ranges (launch geometry is
// config-exposed; the source material leaves it unstated).
struct RandomizationConfig {
  // Robot arm
  Range arm_stiffness_scale{0.8, 1.2};
  Range arm_damping_scale{0.8, 1.2};
  double arm_action_noise_sigma = 0.03;
  double arm_obs_noise_sigma = 0.005;
  Range arm_initial_joint_offset{-0.125, 0.125};
  // Robot hand
  Range hand_stiffness_scale{0.7, 1.3};
  Range hand_damping_scale{0.7, 1.3};
  double hand_action_noise_sigma = 0.02;
  double hand_obs_noise_sigma = 0.005;
  // Object
  Range mass_scale{0.5, 1.5};
  Range restitution{0.0, 0.5};
  double nominal_mass = 0.1;

  // Throw sampling
  Vec3 launch_box_lo = Vec3(1.75, -0.12, 1.32);
  Vec3 launch_box_hi = Vec3(1.85, 0.12, 1.48);
  Range throw_speed{2.6, 3.1};          // horizontal pace toward the aim point, m/s
  double direction_cone_half_angle = 0.0;  // extra angular scatter, rad
  Vec3 aim_offset_lo = Vec3(-0.06, -0.18, -0.06);
  Vec3 aim_offset_hi = Vec3(0.06, 0.18, 0.06);
  bool randomize_orientation = true;    // angular velocity is never randomized
  double reachability_radius = 0.27;
  int max_throw_retries = 64;

  void validate() const;
};

struct EpisodeParams {
  VecX arm_stiffness_scale;   // 6
  VecX arm_damping_scale;     // 6
  VecX hand_stiffness_scale;  // 13
  VecX hand_damping_scale;    // 13
  VecX initial_arm_offset;    // 6, radians
  double arm_action_noise_sigma = 0.0;
  double arm_obs_noise_sigma = 0.0;
  double hand_action_noise_sigma = 0.0;
  double hand_obs_noise_sigma = 0.0;

  static EpisodeParams nominal();
};

// Samples a launch state whose analytic parabola passes within
// `reachability_radius` of `workspace_center` (rejection sampling).
ObjectState sample_throw(Rng& rng, const RandomizationConfig& cfg, const Vec3& workspace_center);

EpisodeParams randomize_episode(Rng& rng, const RandomizationConfig& cfg,
                                const JointChainModel& model);

// Minimum distance from the analytic parabola through (p0, v0) to a point,
// over t in [0, t_end].
double parabola_closest_approach(const Vec3& p0, const Vec3& v0, const Vec3& point,
                                 double t_end);

}  // namespace p2c
