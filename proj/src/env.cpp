#include "p2c/env.hpp"

#include <cmath>

namespace p2c {

Variant variant_from_string(const std::string& name) {
  if (name == "proposed") return Variant::Proposed;
  if (name == "wo-pf") return Variant::WoPf;
  if (name == "only-center") return Variant::OnlyCenter;
  if (name == "only-wh") return Variant::OnlyWh;
  if (name == "sa-rl") return Variant::SingleAgent;
  throw ConfigError("unknown variant: " + name);
}

std::string variant_to_string(Variant v) {
  switch (v) {
    case Variant::Proposed: return "proposed";
    case Variant::WoPf: return "wo-pf";
    case Variant::OnlyCenter: return "only-center";
    case Variant::OnlyWh: return "only-wh";
    case Variant::SingleAgent: return "sa-rl";
  }
  throw ConfigError("unknown variant enum");
}

void EpisodeConfig::validate() const {
  if (max_timesteps < 1) throw ConfigError("episode: max_timesteps must be >= 1");
  if (capture_radius <= 0 || approach_radius <= 0) throw ConfigError("episode: radii must be > 0");
  if (hold_steps < 1) throw ConfigError("episode: hold_steps must be >= 1");
}

namespace {

Eigen::Matrix<double, 6, 1> visual_slot(const ObsFrame& frame, Variant variant,
                                        const CameraModel& cam) {
  Eigen::Matrix<double, 6, 1> z;
  switch (variant) {
    case Variant::WoPf:
      z << frame.p_object_initial.x(), frame.p_object_initial.y(), frame.p_object_initial.z(), 0,
          0, 0;
      return z;
    case Variant::OnlyCenter:
      z << frame.feats.c_x, frame.feats.c_y, frame.feats.dc_x, frame.feats.dc_y, 0, 0;
      return z;
    case Variant::OnlyWh:
      z << frame.box.width() / cam.width, frame.box.height() / cam.height, frame.feats.dw,
          frame.feats.dh, 0, 0;
      return z;
    case Variant::Proposed:
    case Variant::SingleAgent:
      return frame.feats.vector();
  }
  throw ConfigError("unknown variant enum");
}

void fill_arm_frame(VecX& out, int at, const ObsFrame& f, Variant variant,
                    const CameraModel& cam) {
  out.segment<6>(at) = visual_slot(f, variant, cam);
  out.segment<7>(at + 6) = f.pose_eef;
  out.segment<6>(at + 13) = f.q_arm;
  out.segment<6>(at + 19) = f.a_arm;
}

void fill_hand_frame(VecX& out, int at, const ObsFrame& f, Variant variant,
                     const CameraModel& cam) {
  out.segment<6>(at) = visual_slot(f, variant, cam);
  out.segment<7>(at + 6) = f.pose_eef;
  out.segment<13>(at + 13) = f.q_hand;
  out.segment<13>(at + 26) = f.a_hand;
}

}  // namespace

Observations assemble_observations(const ObsFrame& prev, const ObsFrame& cur, Variant variant,
                                   const CameraModel& cam) {
  Observations obs;
  obs.arm = VecX::Zero(kArmObsDim);
  fill_arm_frame(obs.arm, 0, prev, variant, cam);
  fill_arm_frame(obs.arm, 25, cur, variant, cam);

  obs.hand = VecX::Zero(kHandObsDim);
  fill_hand_frame(obs.hand, 0, prev, variant, cam);
  fill_hand_frame(obs.hand, 39, cur, variant, cam);

  obs.critic = VecX::Zero(kCriticObsDim);
  const ObsFrame* frames[2] = {&prev, &cur};
  int at = 0;
  for (const ObsFrame* f : frames) {
    fill_arm_frame(obs.critic, at, *f, variant, cam);
    fill_hand_frame(obs.critic, at + 25, *f, variant, cam);
    obs.critic.segment<3>(at + 64) = f->p_object;
    at += 67;
  }
  return obs;
}

CatchEnv::CatchEnv(EnvConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), model_(make_default_model()), rng_(seed) {
  cfg_.episode.validate();
  cfg_.camera.validate();
  cfg_.randomization.validate();
  JointState home(6);
  home.positions = default_arm_home();
  workspace_center_ = forward_kinematics(model_, home).position;
}

Observations CatchEnv::reset() { return reset(rng_); }

Observations CatchEnv::reset(Rng& rng) {
  params_ = randomize_episode(rng, cfg_.randomization, model_);
  if (!cfg_.training_mode) {
    params_.arm_action_noise_sigma = 0.0;
    params_.arm_obs_noise_sigma = 0.0;
    params_.hand_action_noise_sigma = 0.0;
    params_.hand_obs_noise_sigma = 0.0;
  }
  world_ = WorldState{};
  world_.q_arm.positions = default_arm_home() + params_.initial_arm_offset;
  world_.q_arm.positions =
      world_.q_arm.positions.cwiseMax(model_.arm_limits_lo()).cwiseMin(model_.arm_limits_hi());
  world_.q_hand.positions = model_.hand_limits_lo();
  if (aim_scale_ != 1.0) {
    RandomizationConfig narrowed = cfg_.randomization;
    narrowed.aim_offset_lo *= aim_scale_;
    narrowed.aim_offset_hi *= aim_scale_;
    world_.object = sample_throw(rng, narrowed, workspace_center_);
  } else {
    world_.object = sample_throw(rng, cfg_.randomization, workspace_center_);
  }
  world_.palm = forward_kinematics(model_, world_.q_arm);
  world_.fingertips = fingertip_positions(model_, world_.palm, world_.q_hand);

  done_ = false;
  app_fired_ = false;
  hold_count_ = 0;
  have_box_ = false;
  outcome_ = EpisodeOutcome{};

  const ObsFrame first = make_frame(VecX::Zero(6), VecX::Zero(13), /*bootstrap=*/true);
  frames_[0] = first;
  frames_[1] = first;
  return assemble();
}

ObsFrame CatchEnv::make_frame(const VecX& a_arm, const VecX& a_hand, bool bootstrap) {
  ObsFrame f;
  std::optional<BoundingBox> box = object_bounding_box(cfg_.camera, world_.object);
  BoundingBox raw = box ? *box : (have_box_ ? last_valid_box_ : BoundingBox{});
  if (box) {
    last_valid_box_ = *box;
    have_box_ = true;
  }
  if (cfg_.training_mode && cfg_.box_perturb_px > 0)
    raw = perturb_box(rng_, raw, cfg_.camera, cfg_.box_perturb_px);
  f.box = raw;
  const BoundingBox& prev_box = bootstrap ? raw : frames_[1].box;
  f.feats = extract_pixel_features(raw, prev_box, cfg_.camera);

  std::normal_distribution<double> gauss(0.0, 1.0);
  auto noisy = [&](double v, double sigma) { return sigma > 0 ? v + sigma * gauss(rng_) : v; };

  f.pose_eef[0] = noisy(world_.palm.position.x(), params_.arm_obs_noise_sigma);
  f.pose_eef[1] = noisy(world_.palm.position.y(), params_.arm_obs_noise_sigma);
  f.pose_eef[2] = noisy(world_.palm.position.z(), params_.arm_obs_noise_sigma);
  f.pose_eef[3] = noisy(world_.palm.orientation.w(), params_.arm_obs_noise_sigma);
  f.pose_eef[4] = noisy(world_.palm.orientation.x(), params_.arm_obs_noise_sigma);
  f.pose_eef[5] = noisy(world_.palm.orientation.y(), params_.arm_obs_noise_sigma);
  f.pose_eef[6] = noisy(world_.palm.orientation.z(), params_.arm_obs_noise_sigma);
  for (int i = 0; i < 6; ++i)
    f.q_arm[i] = noisy(world_.q_arm.positions[i], params_.arm_obs_noise_sigma);
  for (int i = 0; i < 13; ++i)
    f.q_hand[i] = noisy(world_.q_hand.positions[i], params_.hand_obs_noise_sigma);
  f.a_arm = a_arm;
  f.a_hand = a_hand;
  f.p_object = world_.object.position;
  f.p_object_initial = bootstrap ? world_.object.position : frames_[1].p_object_initial;
  return f;
}

Observations CatchEnv::assemble() const {
  return assemble_observations(frames_[0], frames_[1], cfg_.variant, cfg_.camera);
}

EventFlags CatchEnv::detect_events(const WorldState& world) {
  EventFlags flags;
  const double palm_dist = (world.palm.position - world.object.position).norm();

  if (!app_fired_ && palm_dist <= cfg_.episode.approach_radius) {
    flags.app = true;
    app_fired_ = true;
  }

  // Fingers count as touching when within the capture radius of the object's
  // surface (center distance minus its half extent), not of its center.
  const double tip_radius = cfg_.episode.capture_radius + world.object.half_extents.maxCoeff();
  int close_fingers = 0;
  for (const Vec3& tip : world.fingertips)
    if ((tip - world.object.position).norm() <= tip_radius) ++close_fingers;
  const double rel_speed = (world.palm_velocity - world.object.linear_velocity).norm();
  const bool catch_condition = palm_dist <= cfg_.episode.capture_radius && close_fingers >= 2 &&
                               rel_speed < cfg_.episode.relative_speed_threshold;
  hold_count_ = catch_condition ? hold_count_ + 1 : 0;
  flags.succ = hold_count_ >= cfg_.episode.hold_steps;

  flags.drop = !flags.succ && world.object.position.z() < cfg_.episode.drop_height;

  const double table = cfg_.episode.table_height;
  bool below = world.palm.position.z() < table;
  for (const Vec3& tip : world.fingertips) below = below || tip.z() < table;
  for (const Vec3& origin : arm_frame_origins(model_, world.q_arm))
    below = below || origin.z() < table - 1e-9;
  flags.coll = below;
  return flags;
}

StepResult CatchEnv::step(const VecX& a_arm, const VecX& a_hand) {
  if (done_) throw std::logic_error("CatchEnv::step called on a finished episode");
  if (a_arm.size() != kArmActionDim || a_hand.size() != kHandActionDim)
    throw DimensionError("CatchEnv::step: action dimension mismatch");
  if (!a_arm.allFinite() || !a_hand.allFinite())
    throw std::invalid_argument("CatchEnv::step: non-finite action");

  std::normal_distribution<double> gauss(0.0, 1.0);
  VecX arm_cmd = a_arm;
  VecX hand_cmd = a_hand;
  if (params_.arm_action_noise_sigma > 0)
    for (int i = 0; i < 6; ++i) arm_cmd[i] += params_.arm_action_noise_sigma * gauss(rng_);
  if (params_.hand_action_noise_sigma > 0)
    for (int i = 0; i < 13; ++i) hand_cmd[i] += params_.hand_action_noise_sigma * gauss(rng_);

  // Arm: normalized [-1,1] joint-position delta scaled by the per-step
  // limit. Hand: [-1,1] rescaled to joint limits.
  const double lim = cfg_.episode.arm_delta_limit;
  VecX arm_target =
      world_.q_arm.positions + lim * arm_cmd.cwiseMax(-1.0).cwiseMin(1.0);
  const VecX hand_lo = model_.hand_limits_lo();
  const VecX hand_hi = model_.hand_limits_hi();
  VecX hand_unit = hand_cmd.cwiseMax(-1.0).cwiseMin(1.0);
  VecX hand_target =
      hand_lo + ((hand_unit.array() + 1.0) * 0.5 * (hand_hi - hand_lo).array()).matrix();

  const Vec3 palm_prev = world_.palm.position;
  const std::array<Vec3, 4> tips_prev = world_.fingertips;
  const Vec3 obj_prev = world_.object.position;

  const double dt = cfg_.clock.physics_dt;
  for (int sub = 0; sub < cfg_.clock.decimation; ++sub) {
    world_.q_arm = step_joints(world_.q_arm, arm_target, model_.arm_joints, dt,
                               &params_.arm_stiffness_scale, &params_.arm_damping_scale);
    world_.q_hand = step_joints(world_.q_hand, hand_target, model_.hand_joints, dt,
                                &params_.hand_stiffness_scale, &params_.hand_damping_scale);
    const Vec3 palm_before = world_.palm.position;
    world_.palm = forward_kinematics(model_, world_.q_arm);
    world_.fingertips = fingertip_positions(model_, world_.palm, world_.q_hand);
    const Vec3 palm_vel = (world_.palm.position - palm_before) / dt;

    if (world_.latched) {
      const Vec3 hold = world_.palm.position + world_.palm.orientation * cfg_.episode.hold_offset;
      world_.object.linear_velocity = (hold - world_.object.position) / dt;
      world_.object.position = hold;
      const double tip_radius =
          cfg_.episode.capture_radius + world_.object.half_extents.maxCoeff();
      int close = 0;
      for (const Vec3& tip : world_.fingertips)
        if ((tip - world_.object.position).norm() <= 1.25 * tip_radius) ++close;
      if (close < 2) world_.latched = false;  // grip opened; object released ballistic
    } else {
      world_.object = step_object(world_.object, dt, cfg_.episode.table_height,
                                  cfg_.episode.table_half_x, cfg_.episode.table_half_y)
                          .state;
      const double palm_dist = (world_.palm.position - world_.object.position).norm();
      const double tip_radius =
          cfg_.episode.capture_radius + world_.object.half_extents.maxCoeff();
      int close = 0;
      for (const Vec3& tip : world_.fingertips)
        if ((tip - world_.object.position).norm() <= tip_radius) ++close;
      if (palm_dist <= cfg_.episode.capture_radius && close >= 2) world_.latched = true;
    }
    world_.palm_velocity = palm_vel;
  }
  world_.t += 1;

  StepResult res;
  res.flags = detect_events(world_);

  const double r_palm =
      compute_r_dist(palm_prev, obj_prev, world_.palm.position, world_.object.position);
  std::array<double, 4> r_fingers;
  for (size_t i = 0; i < 4; ++i)
    r_fingers[i] =
        compute_r_dist(tips_prev[i], obj_prev, world_.fingertips[i], world_.object.position);

  res.arm_breakdown = arm_reward(r_palm, res.flags, a_arm, cfg_.reward);
  res.hand_breakdown = hand_reward(r_palm, r_fingers, res.flags, a_hand, cfg_.reward);
  res.unified_breakdown = unified_reward(r_palm, r_fingers, res.flags, a_arm, a_hand, cfg_.reward);
  res.r_arm = res.arm_breakdown.total;
  res.r_hand = res.hand_breakdown.total;

  if ((world_.palm.position - world_.object.position).norm() <= cfg_.episode.capture_radius)
    outcome_.tracked = true;
  outcome_.length = world_.t;
  if (res.flags.succ) outcome_.success = true;
  if (res.flags.drop) outcome_.dropped = true;

  done_ = res.flags.drop || res.flags.succ || world_.t >= cfg_.episode.max_timesteps;
  res.done = done_;

  frames_[0] = frames_[1];
  frames_[1] = make_frame(a_arm, a_hand, /*bootstrap=*/false);
  res.obs = assemble();
  return res;
}

}  // namespace p2c
