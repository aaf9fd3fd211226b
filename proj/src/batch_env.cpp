#include "p2c/batch_env.hpp"

namespace p2c {

BatchEnv::BatchEnv(const EnvConfig& cfg, int count, std::uint64_t seed) {
  if (count < 1) throw ConfigError("BatchEnv: count must be >= 1");
  envs_.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i)
    envs_.emplace_back(cfg, seed + static_cast<std::uint64_t>(i) * 0x9e3779b97f4a7c15ull);
}

std::vector<Observations> BatchEnv::reset_all() {
  std::vector<Observations> obs;
  obs.reserve(envs_.size());
  for (CatchEnv& e : envs_) obs.push_back(e.reset());
  return obs;
}

BatchStepResult BatchEnv::step(const std::vector<VecX>& arm_actions,
                               const std::vector<VecX>& hand_actions) {
  if (arm_actions.size() != envs_.size() || hand_actions.size() != envs_.size())
    throw DimensionError("BatchEnv::step: action count mismatch");
  BatchStepResult out;
  out.results.reserve(envs_.size());
  out.episode_boundary.assign(envs_.size(), false);
  for (size_t i = 0; i < envs_.size(); ++i) {
    StepResult r = envs_[i].step(arm_actions[i], hand_actions[i]);
    if (r.done) {
      out.finished.push_back(envs_[i].outcome());
      out.episode_boundary[i] = true;
      r.obs = envs_[i].reset();
    }
    out.results.push_back(std::move(r));
  }
  return out;
}

}  // namespace p2c
