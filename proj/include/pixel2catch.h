/* Pixel2Catch public C interface.
 *
 * All functions return a p2c_status; P2C_OK is 0. On error, p2c_last_error()
 * returns a thread-local description of the most recent failure. Objects are
 * opaque handles released with the matching _free function. Strings returned
 * through char** out-parameters are heap-allocated and must be released with
 * p2c_string_free.
 */
#ifndef PIXEL2CATCH_H
#define PIXEL2CATCH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum p2c_status {
  P2C_OK = 0,
  P2C_ERR_INVALID_ARGUMENT = 1,
  P2C_ERR_PARSE = 2,
  P2C_ERR_IO = 3,
  P2C_ERR_MISMATCH = 4, /* checkpoint/config fingerprint or variant mismatch */
  P2C_ERR_RUNTIME = 5
} p2c_status;

typedef struct p2c_config p2c_config;
typedef struct p2c_env p2c_env;

const char* p2c_version(void);
const char* p2c_last_error(void);
void p2c_string_free(char* s);

/* ---- configuration ---------------------------------------------------- */

/* Default configuration for a variant (proposed | wo-pf | only-center |
 * only-wh | sa-rl). */
p2c_status p2c_config_default(const char* variant, p2c_config** out);

/* Load a JSON config file, deep-merged over the defaults. `overrides` are
 * dotted KEY=VALUE strings applied after the file (may be NULL when count
 * is 0). Unknown keys and a missing variant field are parse errors. */
p2c_status p2c_config_load(const char* path, const char* const* overrides, int override_count,
                           p2c_config** out);
p2c_status p2c_config_from_text(const char* json_text, const char* const* overrides,
                                int override_count, p2c_config** out);

p2c_status p2c_config_set_variant(p2c_config* cfg, const char* variant);
p2c_status p2c_config_set_seed(p2c_config* cfg, uint64_t seed);
p2c_status p2c_config_fingerprint(const p2c_config* cfg, uint64_t* out);
p2c_status p2c_config_to_text(const p2c_config* cfg, char** json_out);
void p2c_config_free(p2c_config* cfg);

/* ---- experiment commands ---------------------------------------------- */

/* Train under `cfg`, writing metrics.csv, checkpoint.bin and a frozen
 * config.json to out_dir. resume_checkpoint may be NULL. */
p2c_status p2c_train(const p2c_config* cfg, const char* out_dir, const char* resume_checkpoint);

/* Evaluate a checkpointed policy over `episodes` episodes with the
 * deterministic policy mean. checkpoint_path NULL evaluates freshly
 * initialized (untrained) networks. Either output pointer may be NULL. */
p2c_status p2c_evaluate(const p2c_config* cfg, const char* checkpoint_path, int episodes,
                        uint64_t seed, char** report_json, char** report_table);

/* Scripted analytic interception using ground-truth object state. */
p2c_status p2c_evaluate_oracle(const p2c_config* cfg, int episodes, uint64_t seed,
                               char** report_json, char** report_table);

/* Write JSON-lines episode traces for a checkpointed (or untrained) policy.
 * records_out (optional) receives the number of step records written. */
p2c_status p2c_rollout(const p2c_config* cfg, const char* checkpoint_path, int episodes,
                       uint64_t seed, const char* trace_path, int* records_out);

/* Fit per-joint stiffness/damping scales from a trajectory CSV with header
 * t,joint,target,measured sampled at the physics rate. The JSON report
 * carries fitted scales and the residual MSE. */
p2c_status p2c_sysid(const p2c_config* cfg, const char* csv_path, char** report_json);

/* ---- single environment (for embedding and tests) ---------------------- */

#define P2C_ARM_OBS_DIM 50
#define P2C_HAND_OBS_DIM 78
#define P2C_CRITIC_OBS_DIM 134
#define P2C_ARM_ACTION_DIM 6
#define P2C_HAND_ACTION_DIM 13

typedef struct p2c_step_result {
  double arm_obs[P2C_ARM_OBS_DIM];
  double hand_obs[P2C_HAND_OBS_DIM];
  double critic_obs[P2C_CRITIC_OBS_DIM];
  double reward_arm;
  double reward_hand;
  int done;
  int flag_succ;
  int flag_drop;
  int flag_app;
  int flag_coll;
} p2c_step_result;

p2c_status p2c_env_create(const p2c_config* cfg, uint64_t seed, p2c_env** out);
p2c_status p2c_env_reset(p2c_env* env, p2c_step_result* out);
p2c_status p2c_env_step(p2c_env* env, const double arm_action[P2C_ARM_ACTION_DIM],
                        const double hand_action[P2C_HAND_ACTION_DIM], p2c_step_result* out);
void p2c_env_free(p2c_env* env);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PIXEL2CATCH_H */
