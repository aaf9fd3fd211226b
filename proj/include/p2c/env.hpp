#pragma once

#include "p2c/camera.hpp"
#include "p2c/dynamics.hpp"
#include "p2c/kinematics.hpp"
#include "p2c/randomization.hpp"
#include "p2c/rewards.hpp"

#include <array>
#include <optional>
#include <string>

namespace p2c {

enum class Variant { Proposed, WoPf, OnlyCenter, OnlyWh, SingleAgent };

Variant variant_from_string(const std::string& name);
std::string variant_to_string(Variant v);

inline constexpr int kArmObsDim = 50;
inline constexpr int kHandObsDim = 78;
inline constexpr int kCriticObsDim = 134;
inline constexpr int kArmActionDim = 6;
inline constexpr int kHandActionDim = 13;

struct EpisodeConfig {
  int max_timesteps = 90;  // control steps (3 s at 30 Hz)
  double capture_radius = 0.08;
  double approach_radius = 0.15;
  double drop_height = 0.87;
  int hold_steps = 10;
  double relative_speed_threshold = 0.5;
  double table_height = 0.81;
  double table_half_x = 0.8;
  double table_half_y = 0.8;
  double arm_delta_limit = 0.15;  // rad per control step
  Vec3 hold_offset = Vec3(0.015, -0.045, -0.012);  // grasp hold point in palm frame

  void validate() const;
};

struct EnvConfig {
  SimClock clock;
  CameraModel camera;
  RandomizationConfig randomization;
  RewardConfig reward;
  EpisodeConfig episode;
  Variant variant = Variant::Proposed;
  bool training_mode = true;  // box perturbation + observation/action noise
  double box_perturb_px = 5.0;
};

// One control step's worth of observation inputs.
struct ObsFrame {
  BoundingBox box;
  PixelFeatures feats;
  VecX pose_eef = VecX::Zero(7);  // position + quaternion (w,x,y,z)
  VecX q_arm = VecX::Zero(6);
  VecX a_arm = VecX::Zero(6);
  VecX q_hand = VecX::Zero(13);
  VecX a_hand = VecX::Zero(13);
  Vec3 p_object = Vec3::Zero();
  Vec3 p_object_initial = Vec3::Zero();
};

struct Observations {
  VecX arm;     // 50
  VecX hand;    // 78
  VecX critic;  // 134
};

// Two-frame concatenation with per-variant masking of the visual slot.
Observations assemble_observations(const ObsFrame& prev, const ObsFrame& cur, Variant variant,
                                   const CameraModel& cam);

struct WorldState {
  JointState q_arm{6};
  JointState q_hand{13};
  ObjectState object;
  PalmPose palm;
  std::array<Vec3, 4> fingertips;
  Vec3 palm_velocity = Vec3::Zero();
  bool latched = false;
  int t = 0;
};

struct StepResult {
  Observations obs;
  double r_arm = 0.0;
  double r_hand = 0.0;
  EventFlags flags;
  bool done = false;
  RewardBreakdown arm_breakdown;
  RewardBreakdown hand_breakdown;
  RewardBreakdown unified_breakdown;
};

// Episode outcome counters surfaced to evaluation.
struct EpisodeOutcome {
  bool tracked = false;  // palm came within capture_radius of the object
  bool success = false;
  bool dropped = false;
  int length = 0;
};

class CatchEnv {
 public:
  explicit CatchEnv(EnvConfig cfg, std::uint64_t seed = 0);

  Observations reset();
  Observations reset(Rng& rng);
  StepResult step(const VecX& a_arm, const VecX& a_hand);

  // Pure event detector over the current world state and episode memory.
  EventFlags detect_events(const WorldState& world);

  bool done() const { return done_; }
  const WorldState& world() const { return world_; }
  const EnvConfig& config() const { return cfg_; }
  const JointChainModel& model() const { return model_; }
  const EpisodeParams& episode_params() const { return params_; }
  const EpisodeOutcome& outcome() const { return outcome_; }
  const ObsFrame& current_frame() const { return frames_[1]; }
  const Vec3& workspace_center() const { return workspace_center_; }
  Rng& rng() { return rng_; }

  // Scales the aim-offset ranges for throws sampled from the next reset on;
  // the trainer widens this from its curriculum start value up to 1.
  void set_aim_scale(double scale) { aim_scale_ = scale; }
  double aim_scale() const { return aim_scale_; }

 private:
  ObsFrame make_frame(const VecX& a_arm, const VecX& a_hand, bool bootstrap);
  Observations assemble() const;

  EnvConfig cfg_;
  JointChainModel model_;
  Vec3 workspace_center_;
  Rng rng_;
  WorldState world_;
  EpisodeParams params_ = EpisodeParams::nominal();
  std::array<ObsFrame, 2> frames_;  // [0] = older, [1] = newer
  BoundingBox last_valid_box_;
  bool have_box_ = false;
  bool done_ = true;
  bool app_fired_ = false;
  double aim_scale_ = 1.0;
  int hold_count_ = 0;
  EpisodeOutcome outcome_;
};

}  // namespace p2c
