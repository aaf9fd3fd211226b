#pragma once

#include "p2c/types.hpp"

#include <array>

namespace p2c {

struct JointParams {
  Vec3 axis = Vec3::UnitZ();          // unit rotation axis in parent frame
  Vec3 offset = Vec3::Zero();         // translation from parent frame
  Quat offset_orientation = Quat::Identity();
  double limit_lo = -3.14159265358979;
  double limit_hi = 3.14159265358979;
  double stiffness = 100.0;           // N·m/rad, unit-inertia PD model
  double damping = 20.0;              // N·m·s/rad
};

struct FingerChain {
  Vec3 base_offset = Vec3::Zero();    // from palm frame
  Quat base_orientation = Quat::Identity();
  std::vector<JointParams> joints;    // indices into the 13-joint hand state
  std::vector<int> joint_indices;
  Vec3 tip_offset = Vec3::Zero();     // from last joint frame
};

// Serial 6-DoF arm plus a 4-finger, 13-joint hand rooted at the palm frame.
struct JointChainModel {
  Vec3 base_position = Vec3::Zero();
  Quat base_orientation = Quat::Identity();
  std::vector<JointParams> arm_joints;   // exactly 6
  Vec3 palm_offset = Vec3::Zero();       // from final arm frame
  Quat palm_orientation = Quat::Identity();
  std::vector<JointParams> hand_joints;  // exactly 13, flat storage
  std::array<FingerChain, 4> fingers;    // thumb, index, middle, ring

  VecX arm_limits_lo() const;
  VecX arm_limits_hi() const;
  VecX hand_limits_lo() const;
  VecX hand_limits_hi() const;
};

PalmPose forward_kinematics(const JointChainModel& model, const JointState& q_arm);

// World-frame positions of the 4 fingertips given the palm pose.
std::array<Vec3, 4> fingertip_positions(const JointChainModel& model, const PalmPose& palm,
                                        const JointState& q_hand);

// World-frame origins of the arm joint frames (for the collision test).
std::vector<Vec3> arm_frame_origins(const JointChainModel& model, const JointState& q_arm);

// The documented desk model: tabletop 6-DoF arm at 0.81 m mounting height,
// 4 fingers x 3 curl joints + palm-mounted thumb rotation.
JointChainModel make_default_model();

// Default (pre-randomization) arm configuration; the throw aim point is the
// palm position at this configuration.
VecX default_arm_home();

}  // namespace p2c
