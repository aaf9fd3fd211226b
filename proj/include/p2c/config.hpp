#pragma once

#include "p2c/env.hpp"
#include "p2c/ppo.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>

namespace p2c {

// Resolved experiment configuration. A config file containing only the
// variant field reproduces the documented defaults.
struct ExperimentConfig {
  Variant variant = Variant::Proposed;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  EnvConfig env;
  TrainerConfig trainer;
  Activation activation = Activation::Elu;
  int eval_episodes = 300;
  // Camera placement inputs; env.camera is derived from these.
  Vec3 camera_position = Vec3(-0.5, 0.0, 2.2);
  // Aim above the palm so the whole incoming arc stays inside the image;
  // with the default throw ranges no bounding box touches the border.
  Vec3 camera_look_at = Vec3(0.5, 0.1, 1.55);
  double camera_hfov_deg = 69.0;

  ExperimentConfig();  // derives env.camera from the placement fields

  nlohmann::json to_json() const;
  std::uint64_t fingerprint() const;
  void validate() const;

  // Defaults deep-merged with the file; unknown keys and a missing variant
  // are parse errors. Overrides are dotted KEY=VALUE strings.
  static ExperimentConfig load(const std::string& path,
                               const std::vector<std::string>& overrides = {});
  static ExperimentConfig from_json_text(const std::string& text,
                                         const std::vector<std::string>& overrides = {});
  void save(const std::string& path) const;
};

std::uint64_t fnv1a64(const std::string& data);

}  // namespace p2c
