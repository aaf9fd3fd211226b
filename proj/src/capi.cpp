#include "pixel2catch.h"

#include "p2c/config.hpp"
#include "p2c/sysid.hpp"
#include "p2c/trainer.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

using nlohmann::json;

struct p2c_config {
  p2c::ExperimentConfig cfg;
};

struct p2c_env {
  p2c::CatchEnv env;
  explicit p2c_env(const p2c::EnvConfig& cfg, std::uint64_t seed) : env(cfg, seed) {}
};

namespace {

thread_local std::string g_last_error;

p2c_status fail(p2c_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

p2c_status classify(const std::exception& e) {
  if (dynamic_cast<const p2c::ConfigError*>(&e)) return fail(P2C_ERR_PARSE, e.what());
  if (dynamic_cast<const p2c::DimensionError*>(&e)) return fail(P2C_ERR_INVALID_ARGUMENT, e.what());
  return fail(P2C_ERR_RUNTIME, e.what());
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> collect_overrides(const char* const* overrides, int count) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) {
    if (!overrides || !overrides[i]) throw p2c::ConfigError("null override entry");
    out.emplace_back(overrides[i]);
  }
  return out;
}

// Loads the checkpoint when a path is given (enforcing config compatibility),
// otherwise freshly initialized networks.
std::vector<p2c::Agent> agents_for(const p2c::ExperimentConfig& cfg, const char* checkpoint_path) {
  if (checkpoint_path && *checkpoint_path) {
    p2c::Checkpoint c = p2c::Checkpoint::load(checkpoint_path);
    if (c.variant != p2c::variant_to_string(cfg.variant))
      throw p2c::ConfigError("checkpoint variant '" + c.variant + "' does not match config '" +
                             p2c::variant_to_string(cfg.variant) + "'");
    if (c.config_fingerprint != cfg.fingerprint())
      throw p2c::ConfigError("checkpoint fingerprint does not match config");
    return std::move(c.agents);
  }
  p2c::Rng rng(cfg.seed);
  return p2c::make_agents(cfg, rng);
}

void fill_result(const p2c::CatchEnv& env, const p2c::Observations& obs,
                 const p2c::StepResult* step, p2c_step_result* out) {
  std::memcpy(out->arm_obs, obs.arm.data(), sizeof out->arm_obs);
  std::memcpy(out->hand_obs, obs.hand.data(), sizeof out->hand_obs);
  std::memcpy(out->critic_obs, obs.critic.data(), sizeof out->critic_obs);
  out->reward_arm = step ? step->r_arm : 0.0;
  out->reward_hand = step ? step->r_hand : 0.0;
  out->done = env.done() ? 1 : 0;
  out->flag_succ = step && step->flags.succ;
  out->flag_drop = step && step->flags.drop;
  out->flag_app = step && step->flags.app;
  out->flag_coll = step && step->flags.coll;
}

}  // namespace

extern "C" {

const char* p2c_version(void) { return "1.0.0"; }

const char* p2c_last_error(void) { return g_last_error.c_str(); }

void p2c_string_free(char* s) { std::free(s); }

p2c_status p2c_config_default(const char* variant, p2c_config** out) {
  if (!variant || !out) return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  try {
    auto handle = new p2c_config();
    handle->cfg.variant = p2c::variant_from_string(variant);
    handle->cfg.env.variant = handle->cfg.variant;
    *out = handle;
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_config_load(const char* path, const char* const* overrides, int override_count,
                           p2c_config** out) {
  if (!path || !out) return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  try {
    auto handle = new p2c_config();
    handle->cfg = p2c::ExperimentConfig::load(path, collect_overrides(overrides, override_count));
    *out = handle;
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_config_from_text(const char* json_text, const char* const* overrides,
                                int override_count, p2c_config** out) {
  if (!json_text || !out) return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  try {
    auto handle = new p2c_config();
    handle->cfg =
        p2c::ExperimentConfig::from_json_text(json_text, collect_overrides(overrides, override_count));
    *out = handle;
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_config_set_variant(p2c_config* cfg, const char* variant) {
  if (!cfg || !variant) return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  try {
    cfg->cfg.variant = p2c::variant_from_string(variant);
    cfg->cfg.env.variant = cfg->cfg.variant;
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_config_set_seed(p2c_config* cfg, uint64_t seed) {
  if (!cfg) return fail(P2C_ERR_INVALID_ARGUMENT, "null config");
  cfg->cfg.seed = seed;
  return P2C_OK;
}

p2c_status p2c_config_fingerprint(const p2c_config* cfg, uint64_t* out) {
  if (!cfg || !out) return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  try {
    *out = cfg->cfg.fingerprint();
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_config_to_text(const p2c_config* cfg, char** json_out) {
  if (!cfg || !json_out) return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  try {
    *json_out = dup_string(cfg->cfg.to_json().dump(2));
    return *json_out ? P2C_OK : fail(P2C_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return classify(e);
  }
}

void p2c_config_free(p2c_config* cfg) { delete cfg; }

p2c_status p2c_train(const p2c_config* cfg, const char* out_dir, const char* resume_checkpoint) {
  if (!cfg || !out_dir) return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  try {
    p2c::train(cfg->cfg, out_dir, resume_checkpoint ? resume_checkpoint : "");
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_evaluate(const p2c_config* cfg, const char* checkpoint_path, int episodes,
                        uint64_t seed, char** report_json, char** report_table) {
  if (!cfg) return fail(P2C_ERR_INVALID_ARGUMENT, "null config");
  try {
    const std::vector<p2c::Agent> agents = agents_for(cfg->cfg, checkpoint_path);
    const p2c::EvaluationReport report =
        p2c::evaluate_policy(cfg->cfg, agents, episodes, seed);
    if (report_json) *report_json = dup_string(report.to_json_text());
    if (report_table) *report_table = dup_string(report.to_table_text());
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_evaluate_oracle(const p2c_config* cfg, int episodes, uint64_t seed,
                               char** report_json, char** report_table) {
  if (!cfg) return fail(P2C_ERR_INVALID_ARGUMENT, "null config");
  try {
    const p2c::EvaluationReport report = p2c::evaluate_oracle(cfg->cfg, episodes, seed);
    if (report_json) *report_json = dup_string(report.to_json_text());
    if (report_table) *report_table = dup_string(report.to_table_text());
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_rollout(const p2c_config* cfg, const char* checkpoint_path, int episodes,
                       uint64_t seed, const char* trace_path, int* records_out) {
  if (!cfg || !trace_path) return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  try {
    const std::vector<p2c::Agent> agents = agents_for(cfg->cfg, checkpoint_path);
    const int records =
        p2c::write_rollout_traces(cfg->cfg, agents, episodes, seed, trace_path);
    if (records_out) *records_out = records;
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_sysid(const p2c_config* cfg, const char* csv_path, char** report_json) {
  if (!cfg || !csv_path) return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  try {
    const std::vector<p2c::SysidTrajectory> recorded = p2c::read_sysid_csv_file(csv_path);
    const p2c::JointChainModel model = p2c::make_default_model();
    const double dt = cfg->cfg.env.clock.physics_dt;
    const p2c::SysidResult result = p2c::sysid_fit(recorded, model, dt);
    json j;
    j["stiffness_scale"] = std::vector<double>(result.stiffness_scale.data(),
                                               result.stiffness_scale.data() +
                                                   result.stiffness_scale.size());
    j["damping_scale"] = std::vector<double>(result.damping_scale.data(),
                                             result.damping_scale.data() +
                                                 result.damping_scale.size());
    j["residual_mse"] = result.residual_mse;
    j["trajectories"] = recorded.size();
    j["config_fingerprint"] = cfg->cfg.fingerprint();
    if (report_json) *report_json = dup_string(j.dump(2));
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_env_create(const p2c_config* cfg, uint64_t seed, p2c_env** out) {
  if (!cfg || !out) return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  try {
    p2c::ExperimentConfig full = cfg->cfg;
    full.validate();
    p2c::EnvConfig env_cfg = full.env;
    env_cfg.variant = full.variant;
    *out = new p2c_env(env_cfg, seed);
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_env_reset(p2c_env* env, p2c_step_result* out) {
  if (!env || !out) return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  try {
    const p2c::Observations obs = env->env.reset();
    fill_result(env->env, obs, nullptr, out);
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

p2c_status p2c_env_step(p2c_env* env, const double arm_action[P2C_ARM_ACTION_DIM],
                        const double hand_action[P2C_HAND_ACTION_DIM], p2c_step_result* out) {
  if (!env || !arm_action || !hand_action || !out)
    return fail(P2C_ERR_INVALID_ARGUMENT, "null argument");
  if (env->env.done()) return fail(P2C_ERR_RUNTIME, "environment is done; call p2c_env_reset");
  try {
    p2c::VecX arm = Eigen::Map<const p2c::VecX>(arm_action, P2C_ARM_ACTION_DIM);
    p2c::VecX hand = Eigen::Map<const p2c::VecX>(hand_action, P2C_HAND_ACTION_DIM);
    const p2c::StepResult r = env->env.step(arm, hand);
    fill_result(env->env, r.obs, &r, out);
    return P2C_OK;
  } catch (const std::exception& e) {
    return classify(e);
  }
}

void p2c_env_free(p2c_env* env) { delete env; }

}  // extern "C"
