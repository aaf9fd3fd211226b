#pragma once

#include "p2c/types.hpp"

#include <array>

namespace p2c {

struct RewardConfig {
  double lambda_succ = 10.0;
  double lambda_fail = 5.0;
  double lambda_app = 0.1;
  double lambda_act = 0.01;
  double r_time = -0.01;
};

// Itemized reward terms; `total` always equals their sum.
struct RewardBreakdown {
  double time = 0.0;
  double dist = 0.0;       // palm term (arm) or averaged palm+finger terms (hand)
  double success = 0.0;
  double approach = 0.0;
  double failure = 0.0;    // negative contribution
  double action_penalty = 0.0;  // negative contribution
  double total = 0.0;

  double sum() const { return time + dist + success + approach + failure + action_penalty; }
};

// Temporal difference in Euclidean distance between a robot link and the object.
double compute_r_dist(const Vec3& p_prev_link, const Vec3& p_prev_obj, const Vec3& p_link,
                      const Vec3& p_obj);

RewardBreakdown arm_reward(double r_dist_palm, const EventFlags& flags, const VecX& a_arm,
                           const RewardConfig& cfg);

RewardBreakdown hand_reward(double r_dist_palm, const std::array<double, 4>& r_dist_fingers,
                            const EventFlags& flags, const VecX& a_hand, const RewardConfig& cfg);

// Single-agent baseline: both rewards combined with the shared success /
// failure indicators counted once.
RewardBreakdown unified_reward(double r_dist_palm, const std::array<double, 4>& r_dist_fingers,
                               const EventFlags& flags, const VecX& a_arm, const VecX& a_hand,
                               const RewardConfig& cfg);

}  // namespace p2c
