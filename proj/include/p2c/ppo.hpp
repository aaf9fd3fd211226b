#pragma once

#include "p2c/gaussian.hpp"
#include "p2c/mlp.hpp"

namespace p2c {

struct TrainerConfig {
  double gamma = 0.99;
  double clip_epsilon = 0.2;
  double kl_threshold = 0.016;
  double gae_lambda = 0.95;
  int horizon = 24;       // control steps per env per rollout
  int epochs = 5;
  int minibatches = 4;
  double entropy_coef = 0.001;
  double value_coef = 1.0;
  double initial_lr = 3e-4;
  double initial_action_std = 0.5;  // exploration scale in the [-1,1] action space
  bool kl_early_stop = false;
  // Throw-difficulty curriculum: during training the aim-offset ranges are
  // scaled by curriculum_start at step 0 and widen linearly to the full
  // configured ranges over the first curriculum_fraction of total steps.
  // Evaluation always uses the full ranges.
  double curriculum_start = 0.3;
  double curriculum_fraction = 0.6;
  int env_count = 32;
  long total_env_steps = 2'000'000;
  std::uint64_t seed = 0;
  int metrics_interval = 1;       // iterations per metrics row
  int checkpoint_interval = 200;  // iterations per checkpoint

  void validate() const;
};

// Time-major trajectory storage: row index = t * env_count + env.
struct RolloutBuffer {
  int horizon = 0;
  int env_count = 0;
  MatX observations;       // (horizon*env_count) x obs_dim
  MatX critic_observations;
  MatX actions;
  VecX log_probs;
  VecX rewards;
  VecX values;
  VecX dones;              // 1.0 where the episode ended at this transition
  VecX advantages;
  VecX returns;

  int size() const { return horizon * env_count; }
  void allocate(int horizon_steps, int envs, int obs_dim, int critic_dim, int action_dim);
  int row(int t, int env) const { return t * env_count + env; }
};

// GAE over the buffer; `bootstrap_values` holds V(s_{horizon}) per env.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda,
                 const VecX& bootstrap_values);

struct Agent {
  std::string role;  // arm | hand | unified
  Mlp policy;
  GaussianPolicyHead head;
  Mlp critic;
  AdamState policy_opt;
  AdamState critic_opt;
  long training_steps = 0;

  static Agent create(const std::string& role, int obs_dim, int action_dim, int critic_dim,
                      Rng& rng, const TrainerConfig& cfg, Activation activation = Activation::Elu);
  void set_learning_rate(double lr);
  double learning_rate() const { return policy_opt.learning_rate; }
};

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double learning_rate = 0.0;
  long aborted_minibatches = 0;
};

// Clipped-surrogate PPO epochs with per-minibatch advantage normalization and
// the KL-adaptive learning-rate rule applied after each epoch.
UpdateStats ppo_update(Agent& agent, RolloutBuffer& buffer, const TrainerConfig& cfg, Rng& rng);

double kl_adaptive_lr(double approx_kl, double threshold, double lr);

}  // namespace p2c
