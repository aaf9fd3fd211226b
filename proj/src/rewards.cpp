#include "p2c/rewards.hpp"

namespace p2c {

double compute_r_dist(const Vec3& p_prev_link, const Vec3& p_prev_obj, const Vec3& p_link,
                      const Vec3& p_obj) {
  return (p_prev_link - p_prev_obj).norm() - (p_link - p_obj).norm();
}

RewardBreakdown arm_reward(double r_dist_palm, const EventFlags& flags, const VecX& a_arm,
                           const RewardConfig& cfg) {
  RewardBreakdown b;
  b.time = cfg.r_time;
  b.dist = r_dist_palm;
  b.success = flags.succ ? cfg.lambda_succ : 0.0;
  b.approach = flags.app ? cfg.lambda_app : 0.0;
  b.failure = -cfg.lambda_fail * ((flags.drop ? 1.0 : 0.0) + (flags.coll ? 1.0 : 0.0));
  b.action_penalty = -cfg.lambda_act * a_arm.squaredNorm();
  b.total = b.sum();
  return b;
}

RewardBreakdown hand_reward(double r_dist_palm, const std::array<double, 4>& r_dist_fingers,
                            const EventFlags& flags, const VecX& a_hand, const RewardConfig& cfg) {
  RewardBreakdown b;
  double fingers = 0.0;
  for (double d : r_dist_fingers) fingers += d;
  b.dist = (r_dist_palm + fingers) / 5.0;
  b.success = flags.succ ? cfg.lambda_succ : 0.0;
  b.failure = -cfg.lambda_fail * ((flags.drop ? 1.0 : 0.0) + (flags.coll ? 1.0 : 0.0));
  b.action_penalty = -cfg.lambda_act * a_hand.squaredNorm();
  b.total = b.sum();
  return b;
}

RewardBreakdown unified_reward(double r_dist_palm, const std::array<double, 4>& r_dist_fingers,
                               const EventFlags& flags, const VecX& a_arm, const VecX& a_hand,
                               const RewardConfig& cfg) {
  RewardBreakdown b;
  double fingers = 0.0;
  for (double d : r_dist_fingers) fingers += d;
  b.time = cfg.r_time;
  b.dist = r_dist_palm + (r_dist_palm + fingers) / 5.0;
  b.success = flags.succ ? cfg.lambda_succ : 0.0;
  b.approach = flags.app ? cfg.lambda_app : 0.0;
  b.failure = -cfg.lambda_fail * ((flags.drop ? 1.0 : 0.0) + (flags.coll ? 1.0 : 0.0));
  b.action_penalty = -cfg.lambda_act * (a_arm.squaredNorm() + a_hand.squaredNorm());
  b.total = b.sum();
  return b;
}

}  // namespace p2c
