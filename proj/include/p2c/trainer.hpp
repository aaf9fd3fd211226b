#pragma once

#include "p2c/batch_env.hpp"
#include "p2c/checkpoint.hpp"
#include "p2c/config.hpp"
#include "p2c/ppo.hpp"

#include <functional>
#include <string>

namespace p2c {

struct IterationMetrics {
  long iteration = 0;
  long env_steps = 0;
  double mean_reward_arm = 0.0;
  double mean_reward_hand = 0.0;
  double approx_kl_arm = 0.0;
  double approx_kl_hand = 0.0;
  double lr_arm = 0.0;
  double lr_hand = 0.0;
  double value_loss_arm = 0.0;
  double value_loss_hand = 0.0;
  double entropy_arm = 0.0;
  double entropy_hand = 0.0;
  double tracking_rate = 0.0;  // fraction over episodes finished recently
  double success_rate = 0.0;
};

struct TrainResult {
  std::vector<IterationMetrics> metrics;
  Checkpoint checkpoint;
  std::string metrics_path;
  std::string checkpoint_path;
};

// MAPPO (arm + hand agents, centralized critics) or the single-agent PPO
// baseline, selected by cfg.variant. Writes metrics.csv, checkpoint.bin and
// the frozen config copy under out_dir.
TrainResult train(const ExperimentConfig& cfg, const std::string& out_dir,
                  const std::string& resume_checkpoint = "",
                  const std::function<void(const IterationMetrics&)>& on_iteration = nullptr);

std::vector<Agent> make_agents(const ExperimentConfig& cfg, Rng& rng);

struct EvaluationReport {
  int trials = 0;
  double tracking_rate = 0.0;   // percent
  double success_rate = 0.0;    // percent
  double mean_episode_length = 0.0;
  std::vector<EpisodeOutcome> outcomes;
  std::uint64_t config_fingerprint = 0;

  std::string to_json_text() const;
  std::string to_table_text() const;
};

// Deterministic-mean policy evaluation with observation/action noise and box
// perturbation disabled.
EvaluationReport evaluate_policy(const ExperimentConfig& cfg, const std::vector<Agent>& agents,
                                 int episodes, std::uint64_t seed);

// Scripted interception using ground-truth object state; certifies the task
// is solvable independent of learning.
EvaluationReport evaluate_oracle(const ExperimentConfig& cfg, int episodes, std::uint64_t seed);

// Per-step JSON-lines episode traces.
int write_rollout_traces(const ExperimentConfig& cfg, const std::vector<Agent>& agents,
                         int episodes, std::uint64_t seed, const std::string& trace_path);

void write_metrics_csv(const std::string& path, const std::vector<IterationMetrics>& rows);

// Policy actions for one environment's observations (deterministic mean).
struct ActionPair {
  VecX arm = VecX::Zero(kArmActionDim);
  VecX hand = VecX::Zero(kHandActionDim);
};
ActionPair policy_actions_deterministic(const std::vector<Agent>& agents, const Observations& obs,
                                        Variant variant);

class OraclePolicy {
 public:
  explicit OraclePolicy(const CatchEnv& env);
  ActionPair act(const CatchEnv& env);

 private:
  Vec3 workspace_center_;
};

}  // namespace p2c
