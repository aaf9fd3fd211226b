#include "p2c/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace p2c {

using nlohmann::json;

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError("config: " + key + " must be a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

Range range_from(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError("config: " + key + " must be a 2-element array");
  return Range{j[0].get<double>(), j[1].get<double>()};
}

json defaults_json() {
  const ExperimentConfig d;
  const RandomizationConfig& r = d.env.randomization;
  const RewardConfig& rw = d.env.reward;
  const EpisodeConfig& e = d.env.episode;
  const TrainerConfig& t = d.trainer;

  json camera = {
      {"width", 640},
      {"height", 480},
      {"hfov_deg", d.camera_hfov_deg},
      {"position", vec3_json(d.camera_position)},
      // Near the palm position at the default arm home configuration.
      {"look_at", vec3_json(d.camera_look_at)},
  };
  json randomization = {
      {"arm_stiffness_scale", range_json(r.arm_stiffness_scale)},
      {"arm_damping_scale", range_json(r.arm_damping_scale)},
      {"arm_action_noise_sigma", r.arm_action_noise_sigma},
      {"arm_obs_noise_sigma", r.arm_obs_noise_sigma},
      {"arm_initial_joint_offset", range_json(r.arm_initial_joint_offset)},
      {"hand_stiffness_scale", range_json(r.hand_stiffness_scale)},
      {"hand_damping_scale", range_json(r.hand_damping_scale)},
      {"hand_action_noise_sigma", r.hand_action_noise_sigma},
      {"hand_obs_noise_sigma", r.hand_obs_noise_sigma},
      {"mass_scale", range_json(r.mass_scale)},
      {"restitution", range_json(r.restitution)},
      {"nominal_mass", r.nominal_mass},
      {"launch_box_lo", vec3_json(r.launch_box_lo)},
      {"launch_box_hi", vec3_json(r.launch_box_hi)},
      {"throw_speed", range_json(r.throw_speed)},
      {"direction_cone_half_angle", r.direction_cone_half_angle},
      {"aim_offset_lo", vec3_json(r.aim_offset_lo)},
      {"aim_offset_hi", vec3_json(r.aim_offset_hi)},
      {"randomize_orientation", r.randomize_orientation},
      {"reachability_radius", r.reachability_radius},
      {"max_throw_retries", r.max_throw_retries},
  };
  json reward = {
      {"lambda_succ", rw.lambda_succ}, {"lambda_fail", rw.lambda_fail},
      {"lambda_app", rw.lambda_app},   {"lambda_act", rw.lambda_act},
      {"r_time", rw.r_time},
  };
  json episode = {
      {"max_timesteps", e.max_timesteps},
      {"capture_radius", e.capture_radius},
      {"approach_radius", e.approach_radius},
      {"drop_height", e.drop_height},
      {"hold_steps", e.hold_steps},
      {"relative_speed_threshold", e.relative_speed_threshold},
      {"table_height", e.table_height},
      {"table_half_x", e.table_half_x},
      {"table_half_y", e.table_half_y},
      {"arm_delta_limit", e.arm_delta_limit},
      {"hold_offset", vec3_json(e.hold_offset)},
  };
  json trainer = {
      {"gamma", t.gamma},
      {"clip_epsilon", t.clip_epsilon},
      {"kl_threshold", t.kl_threshold},
      {"gae_lambda", t.gae_lambda},
      {"horizon", t.horizon},
      {"epochs", t.epochs},
      {"minibatches", t.minibatches},
      {"entropy_coef", t.entropy_coef},
      {"value_coef", t.value_coef},
      {"initial_lr", t.initial_lr},
      {"initial_action_std", t.initial_action_std},
      {"kl_early_stop", t.kl_early_stop},
      {"curriculum_start", t.curriculum_start},
      {"curriculum_fraction", t.curriculum_fraction},
      {"env_count", t.env_count},
      {"total_env_steps", t.total_env_steps},
      {"metrics_interval", t.metrics_interval},
      {"checkpoint_interval", t.checkpoint_interval},
  };
  json env = {
      {"training_mode", d.env.training_mode},
      {"box_perturb_px", d.env.box_perturb_px},
      {"activation", "elu"},
  };
  return json{
      {"seed", 0},
      {"output_dir", d.output_dir},
      {"eval_episodes", d.eval_episodes},
      {"camera", camera},
      {"randomization", randomization},
      {"reward", reward},
      {"episode", episode},
      {"trainer", trainer},
      {"env", env},
  };
}

void check_unknown_keys(const json& file, const json& defaults, const std::string& prefix) {
  for (auto it = file.begin(); it != file.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.key() == "variant" && prefix.empty()) continue;
    if (!defaults.contains(it.key())) throw ConfigError("config: unknown field '" + path + "'");
    if (it.value().is_object()) check_unknown_keys(it.value(), defaults.at(it.key()), path);
  }
}

void deep_merge(json& base, const json& overlay) {
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
      deep_merge(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

void apply_override(json& root, const std::string& spec) {
  const size_t eq = spec.find('=');
  if (eq == std::string::npos)
    throw ConfigError("config: override must be KEY=VALUE, got '" + spec + "'");
  const std::string key = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);
  json* node = &root;
  size_t start = 0;
  std::vector<std::string> parts;
  while (true) {
    const size_t dot = key.find('.', start);
    parts.push_back(key.substr(start, dot == std::string::npos ? dot : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->contains(parts[i]))
      throw ConfigError("config: override path '" + key + "' does not exist");
    node = &(*node)[parts[i]];
  }
  if (!node->contains(parts.back()) && parts.back() != "variant")
    throw ConfigError("config: override path '" + key + "' does not exist");
  json parsed = json::parse(value, nullptr, false);
  (*node)[parts.back()] = parsed.is_discarded() ? json(value) : parsed;
}

ExperimentConfig from_resolved_json(const json& j) {
  ExperimentConfig c;
  if (!j.contains("variant") || !j.at("variant").is_string())
    throw ConfigError("config: required field 'variant' is missing");
  c.variant = variant_from_string(j.at("variant").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.output_dir = j.at("output_dir").get<std::string>();
  c.eval_episodes = j.at("eval_episodes").get<int>();

  const json& cam = j.at("camera");
  c.camera_position = vec3_from(cam.at("position"), "camera.position");
  c.camera_look_at = vec3_from(cam.at("look_at"), "camera.look_at");
  c.camera_hfov_deg = cam.at("hfov_deg").get<double>();
  c.env.camera = CameraModel::look_at(c.camera_position, c.camera_look_at,
                                      cam.at("width").get<int>(), cam.at("height").get<int>(),
                                      c.camera_hfov_deg);

  RandomizationConfig& r = c.env.randomization;
  const json& jr = j.at("randomization");
  r.arm_stiffness_scale = range_from(jr.at("arm_stiffness_scale"), "arm_stiffness_scale");
  r.arm_damping_scale = range_from(jr.at("arm_damping_scale"), "arm_damping_scale");
  r.arm_action_noise_sigma = jr.at("arm_action_noise_sigma").get<double>();
  r.arm_obs_noise_sigma = jr.at("arm_obs_noise_sigma").get<double>();
  r.arm_initial_joint_offset = range_from(jr.at("arm_initial_joint_offset"), "arm_initial_joint_offset");
  r.hand_stiffness_scale = range_from(jr.at("hand_stiffness_scale"), "hand_stiffness_scale");
  r.hand_damping_scale = range_from(jr.at("hand_damping_scale"), "hand_damping_scale");
  r.hand_action_noise_sigma = jr.at("hand_action_noise_sigma").get<double>();
  r.hand_obs_noise_sigma = jr.at("hand_obs_noise_sigma").get<double>();
  r.mass_scale = range_from(jr.at("mass_scale"), "mass_scale");
  r.restitution = range_from(jr.at("restitution"), "restitution");
  r.nominal_mass = jr.at("nominal_mass").get<double>();
  r.launch_box_lo = vec3_from(jr.at("launch_box_lo"), "launch_box_lo");
  r.launch_box_hi = vec3_from(jr.at("launch_box_hi"), "launch_box_hi");
  r.throw_speed = range_from(jr.at("throw_speed"), "throw_speed");
  r.direction_cone_half_angle = jr.at("direction_cone_half_angle").get<double>();
  r.aim_offset_lo = vec3_from(jr.at("aim_offset_lo"), "aim_offset_lo");
  r.aim_offset_hi = vec3_from(jr.at("aim_offset_hi"), "aim_offset_hi");
  r.randomize_orientation = jr.at("randomize_orientation").get<bool>();
  r.reachability_radius = jr.at("reachability_radius").get<double>();
  r.max_throw_retries = jr.at("max_throw_retries").get<int>();

  RewardConfig& rw = c.env.reward;
  const json& jw = j.at("reward");
  rw.lambda_succ = jw.at("lambda_succ").get<double>();
  rw.lambda_fail = jw.at("lambda_fail").get<double>();
  rw.lambda_app = jw.at("lambda_app").get<double>();
  rw.lambda_act = jw.at("lambda_act").get<double>();
  rw.r_time = jw.at("r_time").get<double>();

  EpisodeConfig& e = c.env.episode;
  const json& je = j.at("episode");
  e.max_timesteps = je.at("max_timesteps").get<int>();
  e.capture_radius = je.at("capture_radius").get<double>();
  e.approach_radius = je.at("approach_radius").get<double>();
  e.drop_height = je.at("drop_height").get<double>();
  e.hold_steps = je.at("hold_steps").get<int>();
  e.relative_speed_threshold = je.at("relative_speed_threshold").get<double>();
  e.table_height = je.at("table_height").get<double>();
  e.table_half_x = je.at("table_half_x").get<double>();
  e.table_half_y = je.at("table_half_y").get<double>();
  e.arm_delta_limit = je.at("arm_delta_limit").get<double>();
  e.hold_offset = vec3_from(je.at("hold_offset"), "hold_offset");

  TrainerConfig& t = c.trainer;
  const json& jt = j.at("trainer");
  t.gamma = jt.at("gamma").get<double>();
  t.clip_epsilon = jt.at("clip_epsilon").get<double>();
  t.kl_threshold = jt.at("kl_threshold").get<double>();
  t.gae_lambda = jt.at("gae_lambda").get<double>();
  t.horizon = jt.at("horizon").get<int>();
  t.epochs = jt.at("epochs").get<int>();
  t.minibatches = jt.at("minibatches").get<int>();
  t.entropy_coef = jt.at("entropy_coef").get<double>();
  t.value_coef = jt.at("value_coef").get<double>();
  t.initial_lr = jt.at("initial_lr").get<double>();
  t.initial_action_std = jt.at("initial_action_std").get<double>();
  t.kl_early_stop = jt.at("kl_early_stop").get<bool>();
  t.curriculum_start = jt.at("curriculum_start").get<double>();
  t.curriculum_fraction = jt.at("curriculum_fraction").get<double>();
  t.env_count = jt.at("env_count").get<int>();
  t.total_env_steps = jt.at("total_env_steps").get<long>();
  t.metrics_interval = jt.at("metrics_interval").get<int>();
  t.checkpoint_interval = jt.at("checkpoint_interval").get<int>();
  t.seed = c.seed;

  const json& jv = j.at("env");
  c.env.training_mode = jv.at("training_mode").get<bool>();
  c.env.box_perturb_px = jv.at("box_perturb_px").get<double>();
  const std::string act = jv.at("activation").get<std::string>();
  if (act != "elu" && act != "relu") throw ConfigError("config: activation must be elu or relu");
  c.activation = act == "elu" ? Activation::Elu : Activation::Relu;
  c.env.variant = c.variant;
  c.validate();
  return c;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  env.camera = CameraModel::look_at(camera_position, camera_look_at, env.camera.width,
                                    env.camera.height, camera_hfov_deg);
}

void ExperimentConfig::validate() const {
  env.episode.validate();
  env.randomization.validate();
  env.camera.validate();
  trainer.validate();
  if (eval_episodes < 0) throw ConfigError("config: eval_episodes must be >= 0");
}

json ExperimentConfig::to_json() const {
  json j = defaults_json();
  j["variant"] = variant_to_string(variant);
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["eval_episodes"] = eval_episodes;
  j["camera"]["width"] = env.camera.width;
  j["camera"]["height"] = env.camera.height;
  j["camera"]["position"] = vec3_json(camera_position);
  j["camera"]["look_at"] = vec3_json(camera_look_at);
  j["camera"]["hfov_deg"] = camera_hfov_deg;

  const RandomizationConfig& r = env.randomization;
  json& jr = j["randomization"];
  jr["arm_stiffness_scale"] = range_json(r.arm_stiffness_scale);
  jr["arm_damping_scale"] = range_json(r.arm_damping_scale);
  jr["arm_action_noise_sigma"] = r.arm_action_noise_sigma;
  jr["arm_obs_noise_sigma"] = r.arm_obs_noise_sigma;
  jr["arm_initial_joint_offset"] = range_json(r.arm_initial_joint_offset);
  jr["hand_stiffness_scale"] = range_json(r.hand_stiffness_scale);
  jr["hand_damping_scale"] = range_json(r.hand_damping_scale);
  jr["hand_action_noise_sigma"] = r.hand_action_noise_sigma;
  jr["hand_obs_noise_sigma"] = r.hand_obs_noise_sigma;
  jr["mass_scale"] = range_json(r.mass_scale);
  jr["restitution"] = range_json(r.restitution);
  jr["nominal_mass"] = r.nominal_mass;
  jr["launch_box_lo"] = vec3_json(r.launch_box_lo);
  jr["launch_box_hi"] = vec3_json(r.launch_box_hi);
  jr["throw_speed"] = range_json(r.throw_speed);
  jr["direction_cone_half_angle"] = r.direction_cone_half_angle;
  jr["aim_offset_lo"] = vec3_json(r.aim_offset_lo);
  jr["aim_offset_hi"] = vec3_json(r.aim_offset_hi);
  jr["randomize_orientation"] = r.randomize_orientation;
  jr["reachability_radius"] = r.reachability_radius;
  jr["max_throw_retries"] = r.max_throw_retries;

  json& jw = j["reward"];
  jw["lambda_succ"] = env.reward.lambda_succ;
  jw["lambda_fail"] = env.reward.lambda_fail;
  jw["lambda_app"] = env.reward.lambda_app;
  jw["lambda_act"] = env.reward.lambda_act;
  jw["r_time"] = env.reward.r_time;

  json& je = j["episode"];
  je["max_timesteps"] = env.episode.max_timesteps;
  je["capture_radius"] = env.episode.capture_radius;
  je["approach_radius"] = env.episode.approach_radius;
  je["drop_height"] = env.episode.drop_height;
  je["hold_steps"] = env.episode.hold_steps;
  je["relative_speed_threshold"] = env.episode.relative_speed_threshold;
  je["table_height"] = env.episode.table_height;
  je["table_half_x"] = env.episode.table_half_x;
  je["table_half_y"] = env.episode.table_half_y;
  je["arm_delta_limit"] = env.episode.arm_delta_limit;
  je["hold_offset"] = vec3_json(env.episode.hold_offset);

  json& jt = j["trainer"];
  jt["gamma"] = trainer.gamma;
  jt["clip_epsilon"] = trainer.clip_epsilon;
  jt["kl_threshold"] = trainer.kl_threshold;
  jt["gae_lambda"] = trainer.gae_lambda;
  jt["horizon"] = trainer.horizon;
  jt["epochs"] = trainer.epochs;
  jt["minibatches"] = trainer.minibatches;
  jt["entropy_coef"] = trainer.entropy_coef;
  jt["value_coef"] = trainer.value_coef;
  jt["initial_lr"] = trainer.initial_lr;
  jt["initial_action_std"] = trainer.initial_action_std;
  jt["kl_early_stop"] = trainer.kl_early_stop;
  jt["curriculum_start"] = trainer.curriculum_start;
  jt["curriculum_fraction"] = trainer.curriculum_fraction;
  jt["env_count"] = trainer.env_count;
  jt["total_env_steps"] = trainer.total_env_steps;
  jt["metrics_interval"] = trainer.metrics_interval;
  jt["checkpoint_interval"] = trainer.checkpoint_interval;

  j["env"]["training_mode"] = env.training_mode;
  j["env"]["box_perturb_px"] = env.box_perturb_px;
  j["env"]["activation"] = activation == Activation::Elu ? "elu" : "relu";
  return j;
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::uint64_t ExperimentConfig::fingerprint() const { return fnv1a64(to_json().dump()); }

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::vector<std::string>& overrides) {
  json file;
  try {
    file = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  if (!file.is_object()) throw ConfigError("config: top level must be an object");
  json resolved = defaults_json();
  check_unknown_keys(file, resolved, "");
  deep_merge(resolved, file);
  for (const std::string& ov : overrides) apply_override(resolved, ov);
  return from_resolved_json(resolved);
}

ExperimentConfig ExperimentConfig::load(const std::string& path,
                                        const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text, overrides);
}

void ExperimentConfig::save(const std::string& path) const {
  namespace fs = std::filesystem;
  const fs::path tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("config: cannot write " + tmp.string());
    out << to_json().dump(2) << '\n';
  }
  fs::rename(tmp, fs::path(path));
}

}  // namespace p2c
