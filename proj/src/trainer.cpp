#include "p2c/trainer.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace p2c {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<Agent> make_agents(const ExperimentConfig& cfg, Rng& rng) {
  std::vector<Agent> agents;
  if (cfg.variant == Variant::SingleAgent) {
    agents.push_back(Agent::create("unified", kArmObsDim + kHandObsDim,
                                   kArmActionDim + kHandActionDim, kCriticObsDim, rng,
                                   cfg.trainer, cfg.activation));
  } else {
    agents.push_back(
        Agent::create("arm", kArmObsDim, kArmActionDim, kCriticObsDim, rng, cfg.trainer,
                      cfg.activation));
    agents.push_back(
        Agent::create("hand", kHandObsDim, kHandActionDim, kCriticObsDim, rng, cfg.trainer,
                      cfg.activation));
  }
  return agents;
}

namespace {

struct RollingRates {
  long episodes = 0;
  long tracked = 0;
  long succeeded = 0;
  double last_tracking = 0.0;
  double last_success = 0.0;

  void absorb(const std::vector<EpisodeOutcome>& finished) {
    for (const EpisodeOutcome& o : finished) {
      ++episodes;
      if (o.tracked) ++tracked;
      if (o.success) ++succeeded;
    }
  }
  void finish_window() {
    if (episodes > 0) {
      last_tracking = static_cast<double>(tracked) / static_cast<double>(episodes);
      last_success = static_cast<double>(succeeded) / static_cast<double>(episodes);
    }
    episodes = tracked = succeeded = 0;
  }
};

VecX agent_observation(const Observations& obs, const std::string& role) {
  if (role == "arm") return obs.arm;
  if (role == "hand") return obs.hand;
  VecX joint(kArmObsDim + kHandObsDim);
  joint << obs.arm, obs.hand;
  return joint;
}

// One rollout of `horizon` control steps across the batch, filling one
// buffer per agent; returns the bootstrap critic inputs.
struct RolloutOutput {
  std::vector<MatX> bootstrap_critic_obs;  // per agent, env_count x 134
};

RolloutOutput collect_rollouts(std::vector<Agent>& agents, BatchEnv& batch, int horizon,
                               std::vector<RolloutBuffer>& buffers,
                               std::vector<Observations>& current_obs, Rng& rng,
                               RollingRates* rates) {
  const int n_envs = batch.size();
  const int n_agents = static_cast<int>(agents.size());
  for (int a = 0; a < n_agents; ++a)
    buffers[static_cast<size_t>(a)].allocate(horizon, n_envs, agents[static_cast<size_t>(a)].policy.spec.input,
                                             kCriticObsDim, agents[static_cast<size_t>(a)].head.action_dim());

  std::vector<VecX> arm_actions(static_cast<size_t>(n_envs));
  std::vector<VecX> hand_actions(static_cast<size_t>(n_envs));
  for (int t = 0; t < horizon; ++t) {
    std::vector<MatX> means(static_cast<size_t>(n_agents));
    for (int a = 0; a < n_agents; ++a) {
      Agent& agent = agents[static_cast<size_t>(a)];
      RolloutBuffer& buf = buffers[static_cast<size_t>(a)];
      MatX obs_mat(n_envs, agent.policy.spec.input);
      for (int e = 0; e < n_envs; ++e) {
        obs_mat.row(e) = agent_observation(current_obs[static_cast<size_t>(e)], agent.role);
        buf.critic_observations.row(buf.row(t, e)) = current_obs[static_cast<size_t>(e)].critic;
      }
      means[static_cast<size_t>(a)] = agent.policy.forward(obs_mat);
      for (int e = 0; e < n_envs; ++e) {
        const int i = buf.row(t, e);
        buf.observations.row(i) = obs_mat.row(e);
        const SampleResult s =
            gaussian_sample(agent.head, means[static_cast<size_t>(a)].row(e).transpose(), rng);
        buf.actions.row(i) = s.action.transpose();
        buf.log_probs[i] = s.log_prob;
      }
    }
    for (int e = 0; e < n_envs; ++e) {
      if (n_agents == 1) {
        const auto& buf = buffers[0];
        const VecX act = buf.actions.row(buf.row(t, e)).transpose();
        arm_actions[static_cast<size_t>(e)] = act.head(kArmActionDim);
        hand_actions[static_cast<size_t>(e)] = act.tail(kHandActionDim);
      } else {
        arm_actions[static_cast<size_t>(e)] =
            buffers[0].actions.row(buffers[0].row(t, e)).transpose();
        hand_actions[static_cast<size_t>(e)] =
            buffers[1].actions.row(buffers[1].row(t, e)).transpose();
      }
    }
    BatchStepResult step = batch.step(arm_actions, hand_actions);
    if (rates) rates->absorb(step.finished);
    for (int e = 0; e < n_envs; ++e) {
      const StepResult& r = step.results[static_cast<size_t>(e)];
      for (int a = 0; a < n_agents; ++a) {
        RolloutBuffer& buf = buffers[static_cast<size_t>(a)];
        const int i = buf.row(t, e);
        buf.dones[i] = r.done ? 1.0 : 0.0;
        if (n_agents == 1)
          buf.rewards[i] = r.unified_breakdown.total;
        else
          buf.rewards[i] = a == 0 ? r.r_arm : r.r_hand;
      }
      current_obs[static_cast<size_t>(e)] = r.obs;
    }
  }

  RolloutOutput out;
  for (int a = 0; a < n_agents; ++a) {
    Agent& agent = agents[static_cast<size_t>(a)];
    RolloutBuffer& buf = buffers[static_cast<size_t>(a)];
    // Values for all stored steps in one pass.
    buf.values = agent.critic.forward(buf.critic_observations).col(0);
    MatX boot(n_envs, kCriticObsDim);
    for (int e = 0; e < n_envs; ++e) boot.row(e) = current_obs[static_cast<size_t>(e)].critic;
    out.bootstrap_critic_obs.push_back(std::move(boot));
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

void write_metrics_csv(const std::string& path, const std::vector<IterationMetrics>& rows) {
  const fs::path tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("metrics: cannot write " + tmp.string());
    out << "iteration,env_steps,mean_reward_arm,mean_reward_hand,approx_kl_arm,approx_kl_hand,"
           "lr_arm,lr_hand,value_loss_arm,value_loss_hand,entropy_arm,entropy_hand,"
           "tracking_rate,success_rate\n";
    for (const IterationMetrics& m : rows)
      out << m.iteration << ',' << m.env_steps << ',' << format_double(m.mean_reward_arm) << ','
          << format_double(m.mean_reward_hand) << ',' << format_double(m.approx_kl_arm) << ','
          << format_double(m.approx_kl_hand) << ',' << format_double(m.lr_arm) << ','
          << format_double(m.lr_hand) << ',' << format_double(m.value_loss_arm) << ','
          << format_double(m.value_loss_hand) << ',' << format_double(m.entropy_arm) << ','
          << format_double(m.entropy_hand) << ',' << format_double(m.tracking_rate) << ','
          << format_double(m.success_rate) << '\n';
  }
  fs::rename(tmp, fs::path(path));
}

TrainResult train(const ExperimentConfig& cfg, const std::string& out_dir,
                  const std::string& resume_checkpoint,
                  const std::function<void(const IterationMetrics&)>& on_iteration) {
  cfg.validate();
  fs::create_directories(out_dir);
  {
    ExperimentConfig frozen = cfg;
    frozen.save((fs::path(out_dir) / "config.json").string());
  }

  Rng rng(cfg.seed);
  std::vector<Agent> agents = make_agents(cfg, rng);
  long iteration = 0;
  long env_steps = 0;
  if (!resume_checkpoint.empty()) {
    Checkpoint c = Checkpoint::load(resume_checkpoint);
    if (c.config_fingerprint != cfg.fingerprint())
      throw ConfigError("train: resume checkpoint fingerprint does not match config");
    agents = std::move(c.agents);
    iteration = c.iteration;
    env_steps = c.env_steps;
    std::istringstream ss(c.rng_state);
    ss >> rng;
  }

  EnvConfig env_cfg = cfg.env;
  env_cfg.variant = cfg.variant;
  BatchEnv batch(env_cfg, cfg.trainer.env_count, cfg.seed * 977 + 1);
  std::vector<Observations> current_obs = batch.reset_all();

  const int n_agents = static_cast<int>(agents.size());
  std::vector<RolloutBuffer> buffers(static_cast<size_t>(n_agents));
  RollingRates rates;

  TrainResult result;
  const fs::path metrics_path = fs::path(out_dir) / "metrics.csv";
  const fs::path checkpoint_path = fs::path(out_dir) / "checkpoint.bin";

  auto snapshot = [&]() {
    Checkpoint c;
    c.config_fingerprint = cfg.fingerprint();
    c.variant = variant_to_string(cfg.variant);
    c.agents = agents;
    c.iteration = iteration;
    c.env_steps = env_steps;
    std::ostringstream ss;
    ss << rng;
    c.rng_state = ss.str();
    return c;
  };

  const long steps_per_iter = static_cast<long>(cfg.trainer.horizon) * cfg.trainer.env_count;
  while (env_steps < cfg.trainer.total_env_steps) {
    if (cfg.trainer.curriculum_start < 1.0 && cfg.trainer.curriculum_fraction > 0.0) {
      const double progress =
          static_cast<double>(env_steps) / static_cast<double>(cfg.trainer.total_env_steps);
      const double scale =
          std::min(1.0, cfg.trainer.curriculum_start +
                            (1.0 - cfg.trainer.curriculum_start) *
                                progress / cfg.trainer.curriculum_fraction);
      for (int e = 0; e < batch.size(); ++e) batch.env(e).set_aim_scale(scale);
    }
    RolloutOutput ro =
        collect_rollouts(agents, batch, cfg.trainer.horizon, buffers, current_obs, rng, &rates);
    env_steps += steps_per_iter;
    ++iteration;

    IterationMetrics m;
    m.iteration = iteration;
    m.env_steps = env_steps;
    rates.finish_window();
    m.tracking_rate = rates.last_tracking;
    m.success_rate = rates.last_success;

    std::vector<UpdateStats> stats(static_cast<size_t>(n_agents));
    for (int a = 0; a < n_agents; ++a) {
      Agent& agent = agents[static_cast<size_t>(a)];
      RolloutBuffer& buf = buffers[static_cast<size_t>(a)];
      const VecX bootstrap =
          agent.critic.forward(ro.bootstrap_critic_obs[static_cast<size_t>(a)]).col(0);
      compute_gae(buf, cfg.trainer.gamma, cfg.trainer.gae_lambda, bootstrap);
      stats[static_cast<size_t>(a)] = ppo_update(agent, buf, cfg.trainer, rng);
    }

    if (n_agents == 1) {
      m.mean_reward_arm = m.mean_reward_hand = buffers[0].rewards.mean();
      m.approx_kl_arm = m.approx_kl_hand = stats[0].approx_kl;
      m.lr_arm = m.lr_hand = stats[0].learning_rate;
      m.value_loss_arm = m.value_loss_hand = stats[0].value_loss;
      m.entropy_arm = m.entropy_hand = stats[0].entropy;
    } else {
      m.mean_reward_arm = buffers[0].rewards.mean();
      m.mean_reward_hand = buffers[1].rewards.mean();
      m.approx_kl_arm = stats[0].approx_kl;
      m.approx_kl_hand = stats[1].approx_kl;
      m.lr_arm = stats[0].learning_rate;
      m.lr_hand = stats[1].learning_rate;
      m.value_loss_arm = stats[0].value_loss;
      m.value_loss_hand = stats[1].value_loss;
      m.entropy_arm = stats[0].entropy;
      m.entropy_hand = stats[1].entropy;
    }
    if (iteration % cfg.trainer.metrics_interval == 0) {
      result.metrics.push_back(m);
      if (on_iteration) on_iteration(m);
    }
    if (cfg.trainer.checkpoint_interval > 0 && iteration % cfg.trainer.checkpoint_interval == 0) {
      snapshot().save(checkpoint_path.string());
      write_metrics_csv(metrics_path.string(), result.metrics);
    }
  }

  result.checkpoint = snapshot();
  result.checkpoint.save(checkpoint_path.string());
  write_metrics_csv(metrics_path.string(), result.metrics);
  result.metrics_path = metrics_path.string();
  result.checkpoint_path = checkpoint_path.string();
  return result;
}

ActionPair policy_actions_deterministic(const std::vector<Agent>& agents, const Observations& obs,
                                        Variant variant) {
  ActionPair out;
  if (variant == Variant::SingleAgent) {
    VecX joint(kArmObsDim + kHandObsDim);
    joint << obs.arm, obs.hand;
    const VecX act = agents.at(0).policy.forward_one(joint);
    out.arm = act.head(kArmActionDim);
    out.hand = act.tail(kHandActionDim);
  } else {
    out.arm = agents.at(0).policy.forward_one(obs.arm);
    out.hand = agents.at(1).policy.forward_one(obs.hand);
  }
  return out;
}

namespace {

EvaluationReport run_evaluation(const ExperimentConfig& cfg, int episodes, std::uint64_t seed,
                                const std::function<ActionPair(const CatchEnv&, const Observations&)>& policy) {
  if (episodes <= 0) throw ConfigError("evaluate: episodes must be > 0");
  EnvConfig env_cfg = cfg.env;
  env_cfg.variant = cfg.variant == Variant::SingleAgent ? Variant::SingleAgent : cfg.variant;
  env_cfg.training_mode = false;
  CatchEnv env(env_cfg, seed);

  EvaluationReport report;
  report.trials = episodes;
  report.config_fingerprint = cfg.fingerprint();
  long tracked = 0, succeeded = 0, total_len = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    Observations obs = env.reset();
    while (!env.done()) {
      const ActionPair act = policy(env, obs);
      obs = env.step(act.arm, act.hand).obs;
    }
    const EpisodeOutcome& o = env.outcome();
    report.outcomes.push_back(o);
    if (o.tracked) ++tracked;
    if (o.success) ++succeeded;
    total_len += o.length;
  }
  report.tracking_rate = 100.0 * static_cast<double>(tracked) / episodes;
  report.success_rate = 100.0 * static_cast<double>(succeeded) / episodes;
  report.mean_episode_length = static_cast<double>(total_len) / episodes;
  return report;
}

}  // namespace

EvaluationReport evaluate_policy(const ExperimentConfig& cfg, const std::vector<Agent>& agents,
                                 int episodes, std::uint64_t seed) {
  return run_evaluation(cfg, episodes, seed, [&](const CatchEnv&, const Observations& obs) {
    return policy_actions_deterministic(agents, obs, cfg.variant);
  });
}

EvaluationReport evaluate_oracle(const ExperimentConfig& cfg, int episodes, std::uint64_t seed) {
  return run_evaluation(cfg, episodes, seed, [&](const CatchEnv& env, const Observations&) {
    OraclePolicy oracle(env);
    return oracle.act(env);
  });
}

std::string EvaluationReport::to_json_text() const {
  json j;
  j["trials"] = trials;
  j["tracking_rate_percent"] = tracking_rate;
  j["success_rate_percent"] = success_rate;
  j["mean_episode_length"] = mean_episode_length;
  j["config_fingerprint"] = config_fingerprint;
  json eps = json::array();
  for (const EpisodeOutcome& o : outcomes)
    eps.push_back({{"tracked", o.tracked}, {"success", o.success}, {"dropped", o.dropped},
                   {"length", o.length}});
  j["episodes"] = eps;
  return j.dump(2);
}

std::string EvaluationReport::to_table_text() const {
  std::ostringstream out;
  out << "trials            " << trials << "\n"
      << "tracking rate     " << tracking_rate << " %\n"
      << "success rate      " << success_rate << " %\n"
      << "mean ep. length   " << mean_episode_length << "\n";
  return out.str();
}

OraclePolicy::OraclePolicy(const CatchEnv& env) : workspace_center_(env.workspace_center()) {}

ActionPair OraclePolicy::act(const CatchEnv& env) {
  const WorldState& w = env.world();
  const JointChainModel& model = env.model();
  const EpisodeConfig& ep = env.config().episode;

  ActionPair act;
  const Vec3 hold_now = w.palm.position + w.palm.orientation * ep.hold_offset;

  double closure = 0.5;  // pre-shaped basket, fraction of the curl range
  if (w.latched) {
    // Hold still with the grip closed until the success counter matures.
    closure = 0.7;
  } else {
    // Interception point: sample the analytic parabola from the current
    // object state and pick the reachable point (conservative palm speed
    // budget) nearest the workspace center; fall back to the point with the
    // largest time margin when nothing is comfortably reachable.
    const Vec3 g(0, 0, kGravityZ);
    const Vec3 p0 = w.object.position;
    const Vec3 v0 = w.object.linear_velocity;
    const double vz = v0.z(), z0 = p0.z();
    const double disc = vz * vz + 2.0 * 9.81 * std::max(z0 - ep.drop_height, 0.0);
    const double t_end = std::max((vz + std::sqrt(std::max(disc, 0.0))) / 9.81, 1e-3);
    const double palm_speed = 0.45 * ep.arm_delta_limit / 0.1;  // scales with the delta cap
    const int samples = 240;
    Vec3 target = hold_now;
    double best_center = 1e300;
    double best_margin = -1e300;
    Vec3 margin_target = hold_now;
    double closest = 1e300;
    Vec3 closest_target = hold_now;
    bool found = false;
    for (int i = 0; i <= samples; ++i) {
      const double t = t_end * i / samples;
      const Vec3 p = p0 + v0 * t + 0.5 * g * t * t;
      const double reach = (p - hold_now).norm();
      const double margin = t - reach / palm_speed;
      if (margin > best_margin) {
        best_margin = margin;
        margin_target = p;
      }
      if (reach < closest) {
        closest = reach;
        closest_target = p;
      }
      if (margin >= 0.0) {
        const double d = (p - workspace_center_).squaredNorm();
        if (d < best_center) {
          best_center = d;
          target = p;
          found = true;
        }
      }
    }
    if (!found) target = margin_target;
    // Terminal phase: with little slack left, stop optimizing for the
    // workspace center and minimize the miss distance instead.
    if (best_margin < 0.15) target = closest_target;

    // Damped least-squares step driving the hold point onto the target.
    Eigen::Matrix<double, 3, 6> jac;
    const double h = 1e-6;
    for (int j = 0; j < 6; ++j) {
      JointState qp = w.q_arm;
      qp.positions[j] += h;
      JointState qm = w.q_arm;
      qm.positions[j] -= h;
      const PalmPose pp = forward_kinematics(model, qp);
      const PalmPose pm = forward_kinematics(model, qm);
      jac.col(j) = ((pp.position + pp.orientation * ep.hold_offset) -
                    (pm.position + pm.orientation * ep.hold_offset)) /
                   (2 * h);
    }
    const Vec3 err = target - hold_now;
    const Eigen::Matrix3d jjt = jac * jac.transpose() + 1e-4 * Eigen::Matrix3d::Identity();
    const VecX dq = jac.transpose() * jjt.ldlt().solve(err);
    act.arm = (dq / ep.arm_delta_limit).cwiseMax(-1.0).cwiseMin(1.0);
  }

  act.hand = VecX::Constant(13, 2.0 * closure - 1.0);
  act.hand[0] = 0.0;  // thumb rotation stays centered
  return act;
}

int write_rollout_traces(const ExperimentConfig& cfg, const std::vector<Agent>& agents,
                         int episodes, std::uint64_t seed, const std::string& trace_path) {
  if (episodes <= 0) throw ConfigError("rollout: episodes must be > 0");
  EnvConfig env_cfg = cfg.env;
  env_cfg.variant = cfg.variant;
  env_cfg.training_mode = false;
  CatchEnv env(env_cfg, seed);

  std::ofstream out(trace_path);
  if (!out) throw std::runtime_error("rollout: cannot write " + trace_path);
  out.precision(17);

  auto vec_json = [](const VecX& v) {
    json a = json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
  };
  auto vec3_json = [](const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
  auto breakdown_json = [](const RewardBreakdown& b) {
    return json{{"time", b.time},       {"dist", b.dist},
                {"success", b.success}, {"approach", b.approach},
                {"failure", b.failure}, {"action_penalty", b.action_penalty},
                {"total", b.total}};
  };

  int records = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    Observations obs = env.reset();
    int step_idx = 0;
    while (!env.done()) {
      const ActionPair act = policy_actions_deterministic(agents, obs, cfg.variant);
      const StepResult r = env.step(act.arm, act.hand);
      const WorldState& w = env.world();
      const ObsFrame& frame = env.current_frame();
      json rec;
      rec["episode"] = ep;
      rec["step"] = step_idx;
      rec["time"] = (step_idx + 1) * env.config().clock.control_dt();
      rec["q_arm"] = vec_json(w.q_arm.positions);
      rec["q_hand"] = vec_json(w.q_hand.positions);
      rec["object"] = {{"position", vec3_json(w.object.position)},
                       {"velocity", vec3_json(w.object.linear_velocity)},
                       {"orientation_wxyz",
                        json::array({w.object.orientation.w(), w.object.orientation.x(),
                                     w.object.orientation.y(), w.object.orientation.z()})}};
      rec["box"] = {{"u_min", frame.box.u_min}, {"v_min", frame.box.v_min},
                    {"u_max", frame.box.u_max}, {"v_max", frame.box.v_max}};
      rec["features"] = vec_json(frame.feats.vector());
      rec["a_arm"] = vec_json(act.arm);
      rec["a_hand"] = vec_json(act.hand);
      rec["reward_arm"] = breakdown_json(r.arm_breakdown);
      rec["reward_hand"] = breakdown_json(r.hand_breakdown);
      rec["flags"] = {{"succ", r.flags.succ}, {"drop", r.flags.drop}, {"app", r.flags.app},
                      {"coll", r.flags.coll}};
      rec["done"] = r.done;
      out << rec.dump() << '\n';
      obs = r.obs;
      ++step_idx;
      ++records;
    }
  }
  return records;
}

}  // namespace p2c
