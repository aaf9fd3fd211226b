#include "p2c/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace p2c {

void TrainerConfig::validate() const {
  if (gamma <= 0.0 || gamma > 1.0) throw ConfigError("trainer: gamma must be in (0, 1]");
  if (clip_epsilon <= 0.0) throw ConfigError("trainer: clip epsilon must be > 0");
  if (horizon < 1 || epochs < 0 || minibatches < 1) throw ConfigError("trainer: bad update sizes");
  if (env_count < 1) throw ConfigError("trainer: env_count must be >= 1");
  if (initial_lr <= 0.0) throw ConfigError("trainer: learning rate must be > 0");
  if (initial_action_std <= 0.0) throw ConfigError("trainer: initial_action_std must be > 0");
  if (curriculum_start <= 0.0 || curriculum_start > 1.0)
    throw ConfigError("trainer: curriculum_start must be in (0, 1]");
  if (curriculum_fraction < 0.0 || curriculum_fraction > 1.0)
    throw ConfigError("trainer: curriculum_fraction must be in [0, 1]");
}

void RolloutBuffer::allocate(int horizon_steps, int envs, int obs_dim, int critic_dim,
                             int action_dim) {
  horizon = horizon_steps;
  env_count = envs;
  const int n = size();
  observations.resize(n, obs_dim);
  critic_observations.resize(n, critic_dim);
  actions.resize(n, action_dim);
  log_probs.resize(n);
  rewards.resize(n);
  values.resize(n);
  dones.resize(n);
  advantages = VecX::Zero(n);
  returns = VecX::Zero(n);
}

void compute_gae(RolloutBuffer& buffer, double gamma, double lambda,
                 const VecX& bootstrap_values) {
  if (bootstrap_values.size() != buffer.env_count)
    throw DimensionError("compute_gae: bootstrap size mismatch");
  if (buffer.values.size() != buffer.size()) throw DimensionError("compute_gae: values missing");
  VecX next_adv = VecX::Zero(buffer.env_count);
  VecX next_val = bootstrap_values;
  for (int t = buffer.horizon - 1; t >= 0; --t) {
    for (int e = 0; e < buffer.env_count; ++e) {
      const int i = buffer.row(t, e);
      const double not_done = 1.0 - buffer.dones[i];
      const double delta =
          buffer.rewards[i] + gamma * next_val[e] * not_done - buffer.values[i];
      const double adv = delta + gamma * lambda * not_done * next_adv[e];
      buffer.advantages[i] = adv;
      buffer.returns[i] = adv + buffer.values[i];
      next_adv[e] = adv;
      next_val[e] = buffer.values[i];
    }
  }
}

Agent Agent::create(const std::string& role, int obs_dim, int action_dim, int critic_dim,
                    Rng& rng, const TrainerConfig& cfg, Activation activation) {
  Agent a;
  a.role = role;
  MlpSpec policy_spec;
  policy_spec.input = obs_dim;
  policy_spec.output = action_dim;
  policy_spec.activation = activation;
  MlpSpec critic_spec;
  critic_spec.input = critic_dim;
  critic_spec.output = 1;
  critic_spec.activation = activation;
  a.policy = Mlp::create(policy_spec, rng, 0.01);
  a.critic = Mlp::create(critic_spec, rng, 1.0);
  a.head = GaussianPolicyHead::create(action_dim);
  a.head.log_std.setConstant(std::log(cfg.initial_action_std));
  a.head.clamp();
  a.policy_opt = AdamState::create(a.policy.params, cfg.initial_lr);
  a.critic_opt = AdamState::create(a.critic.params, cfg.initial_lr);
  return a;
}

void Agent::set_learning_rate(double lr) {
  policy_opt.learning_rate = lr;
  critic_opt.learning_rate = lr;
}

double kl_adaptive_lr(double approx_kl, double threshold, double lr) {
  if (approx_kl > 2.0 * threshold)
    lr /= 1.5;
  else if (approx_kl < 0.5 * threshold)
    lr *= 1.5;
  return std::clamp(lr, 1e-6, 1e-2);
}

UpdateStats ppo_update(Agent& agent, RolloutBuffer& buffer, const TrainerConfig& cfg, Rng& rng) {
  UpdateStats stats;
  stats.learning_rate = agent.learning_rate();
  if (cfg.epochs == 0) return stats;
  const int n = buffer.size();
  const int action_dim = agent.head.action_dim();
  const double eps = cfg.clip_epsilon;

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  double stat_count = 0;
  bool stop = false;
  for (int epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_kl = 0.0;
    int epoch_batches = 0;
    for (int mb = 0; mb < cfg.minibatches; ++mb) {
      const int start = mb * n / cfg.minibatches;
      const int end = (mb + 1) * n / cfg.minibatches;
      const int m = end - start;
      if (m <= 0) continue;

      MatX obs(m, buffer.observations.cols());
      MatX cobs(m, buffer.critic_observations.cols());
      MatX acts(m, action_dim);
      VecX old_logp(m), adv(m), ret(m);
      for (int k = 0; k < m; ++k) {
        const int i = order[static_cast<size_t>(start + k)];
        obs.row(k) = buffer.observations.row(i);
        cobs.row(k) = buffer.critic_observations.row(i);
        acts.row(k) = buffer.actions.row(i);
        old_logp[k] = buffer.log_probs[i];
        adv[k] = buffer.advantages[i];
        ret[k] = buffer.returns[i];
      }
      // Per-minibatch advantage normalization.
      const double mean = adv.mean();
      const double var = (adv.array() - mean).square().sum() / m;
      adv = (adv.array() - mean) / std::sqrt(var + 1e-8);

      MlpCache pi_cache;
      const MatX means = agent.policy.forward(obs, &pi_cache);
      const VecX new_logp = gaussian_log_prob_batch(agent.head, means, acts);
      const VecX ratio = (new_logp - old_logp).array().exp();

      double surrogate = 0.0, clipped = 0.0;
      VecX dlogp = VecX::Zero(m);
      for (int k = 0; k < m; ++k) {
        const double r = ratio[k];
        const double unclipped = r * adv[k];
        const double clip_r = std::clamp(r, 1.0 - eps, 1.0 + eps);
        surrogate += std::min(unclipped, clip_r * adv[k]);
        if (std::abs(r - 1.0) > eps) clipped += 1.0;
        const bool clipped_out = (adv[k] > 0 && r > 1.0 + eps) || (adv[k] < 0 && r < 1.0 - eps);
        if (!clipped_out) dlogp[k] = adv[k] * r;  // d surrogate / d logp
      }
      surrogate /= m;
      const double kl = (old_logp - new_logp).mean();
      const double entropy = gaussian_entropy(agent.head);
      const double loss = -surrogate - cfg.entropy_coef * entropy;
      if (!std::isfinite(loss)) {
        ++stats.aborted_minibatches;
        continue;
      }

      // Policy gradient via the mean path plus the state-independent log-std.
      const MatX dmean = gaussian_log_prob_grad_mean(agent.head, means, acts);
      const MatX grad_mean = dmean.array().colwise() * (-dlogp / m).array();
      MlpGrads pi_grads = agent.policy.backward(pi_cache, grad_mean);
      const MatX dls = gaussian_log_prob_grad_log_std(agent.head, means, acts);
      VecX logstd_grad = (dls.transpose() * (-dlogp / m));
      logstd_grad.array() -= cfg.entropy_coef;  // d entropy / d log_std = 1

      // Critic regression.
      MlpCache v_cache;
      const MatX v = agent.critic.forward(cobs, &v_cache);
      const VecX verr = v.col(0) - ret;
      const double value_loss = cfg.value_coef * verr.squaredNorm() / m;
      if (!std::isfinite(value_loss)) {
        ++stats.aborted_minibatches;
        continue;
      }
      MatX grad_v = (cfg.value_coef * 2.0 / m) * verr;
      MlpGrads v_grads = agent.critic.backward(v_cache, grad_v);

      adam_step(agent.policy.params, pi_grads, agent.policy_opt);
      if (logstd_grad.allFinite())
        agent.head.log_std -= agent.policy_opt.learning_rate * logstd_grad;
      agent.head.clamp();
      adam_step(agent.critic.params, v_grads, agent.critic_opt);
      ++agent.training_steps;

      stats.policy_loss += -surrogate;
      stats.value_loss += value_loss;
      stats.entropy += entropy;
      stats.approx_kl += kl;
      stats.clip_fraction += clipped / m;
      stat_count += 1;
      epoch_kl += kl;
      ++epoch_batches;
    }
    if (epoch_batches > 0) {
      epoch_kl /= epoch_batches;
      if (cfg.kl_early_stop && epoch_kl > cfg.kl_threshold) stop = true;
      // The KL trust region governs the policy only; the critic keeps its
      // configured rate so value regression is not throttled by policy drift.
      agent.policy_opt.learning_rate =
          kl_adaptive_lr(epoch_kl, cfg.kl_threshold, agent.policy_opt.learning_rate);
    }
  }
  if (stat_count > 0) {
    stats.policy_loss /= stat_count;
    stats.value_loss /= stat_count;
    stats.entropy /= stat_count;
    stats.approx_kl /= stat_count;
    stats.clip_fraction /= stat_count;
  }
  stats.learning_rate = agent.learning_rate();
  return stats;
}

}  // namespace p2c
