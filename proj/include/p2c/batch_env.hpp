#pragma once

#include "p2c/env.hpp"

namespace p2c {

struct BatchStepResult {
  std::vector<StepResult> results;       // per env; obs already post-auto-reset when done
  std::vector<bool> episode_boundary;    // true where an auto-reset happened
  std::vector<EpisodeOutcome> finished;  // outcomes of episodes that ended this step
};

// N independent single-writer environments stepped in env-index order.
class BatchEnv {
 public:
  BatchEnv(const EnvConfig& cfg, int count, std::uint64_t seed);

  std::vector<Observations> reset_all();
  BatchStepResult step(const std::vector<VecX>& arm_actions,
                       const std::vector<VecX>& hand_actions);

  int size() const { return static_cast<int>(envs_.size()); }
  CatchEnv& env(int i) { return envs_[static_cast<size_t>(i)]; }
  const CatchEnv& env(int i) const { return envs_[static_cast<size_t>(i)]; }

 private:
  std::vector<CatchEnv> envs_;
};

}  // namespace p2c
