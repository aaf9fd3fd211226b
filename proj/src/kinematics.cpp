#include "p2c/kinematics.hpp"

namespace p2c {

namespace {

VecX gather(const std::vector<JointParams>& joints, double JointParams::*field) {
  VecX out(static_cast<int>(joints.size()));
  for (size_t i = 0; i < joints.size(); ++i) out[static_cast<int>(i)] = joints[i].*field;
  return out;
}

}  // namespace

VecX JointChainModel::arm_limits_lo() const { return gather(arm_joints, &JointParams::limit_lo); }
VecX JointChainModel::arm_limits_hi() const { return gather(arm_joints, &JointParams::limit_hi); }
VecX JointChainModel::hand_limits_lo() const { return gather(hand_joints, &JointParams::limit_lo); }
VecX JointChainModel::hand_limits_hi() const { return gather(hand_joints, &JointParams::limit_hi); }

PalmPose forward_kinematics(const JointChainModel& model, const JointState& q_arm) {
  if (q_arm.count() != 6) throw DimensionError("forward_kinematics: expected 6 arm joints");
  Vec3 p = model.base_position;
  Quat r = model.base_orientation;
  for (int i = 0; i < 6; ++i) {
    const JointParams& j = model.arm_joints[static_cast<size_t>(i)];
    p += r * j.offset;
    r = r * j.offset_orientation;
    r = r * Quat(Eigen::AngleAxisd(q_arm.positions[i], j.axis));
  }
  PalmPose palm;
  palm.position = p + r * model.palm_offset;
  palm.orientation = (r * model.palm_orientation).normalized();
  return palm;
}

std::vector<Vec3> arm_frame_origins(const JointChainModel& model, const JointState& q_arm) {
  if (q_arm.count() != 6) throw DimensionError("arm_frame_origins: expected 6 arm joints");
  std::vector<Vec3> origins;
  origins.reserve(7);
  Vec3 p = model.base_position;
  Quat r = model.base_orientation;
  for (int i = 0; i < 6; ++i) {
    const JointParams& j = model.arm_joints[static_cast<size_t>(i)];
    p += r * j.offset;
    origins.push_back(p);
    r = r * j.offset_orientation;
    r = r * Quat(Eigen::AngleAxisd(q_arm.positions[i], j.axis));
  }
  origins.push_back(p + r * model.palm_offset);
  return origins;
}

std::array<Vec3, 4> fingertip_positions(const JointChainModel& model, const PalmPose& palm,
                                        const JointState& q_hand) {
  if (q_hand.count() != 13) throw DimensionError("fingertip_positions: expected 13 hand joints");
  std::array<Vec3, 4> tips;
  for (size_t f = 0; f < 4; ++f) {
    const FingerChain& chain = model.fingers[f];
    Vec3 p = palm.position + palm.orientation * chain.base_offset;
    Quat r = palm.orientation * chain.base_orientation;
    for (size_t k = 0; k < chain.joints.size(); ++k) {
      const JointParams& j = chain.joints[k];
      const double angle = q_hand.positions[chain.joint_indices[k]];
      p += r * j.offset;
      r = r * j.offset_orientation;
      r = r * Quat(Eigen::AngleAxisd(angle, j.axis));
    }
    tips[f] = p + r * chain.tip_offset;
  }
  return tips;
}

namespace {

JointParams arm_joint(Vec3 axis, Vec3 offset, double lo, double hi) {
  JointParams j;
  j.axis = axis.normalized();
  j.offset = offset;
  j.limit_lo = lo;
  j.limit_hi = hi;
  j.stiffness = 100.0;
  j.damping = 20.0;
  return j;
}

JointParams curl_joint(Vec3 offset, double lo, double hi) {
  JointParams j;
  j.axis = Vec3::UnitX();
  j.offset = offset;
  j.limit_lo = lo;
  j.limit_hi = hi;
  j.stiffness = 60.0;
  j.damping = 5.0;
  return j;
}

FingerChain make_finger(Vec3 base, int first_index, bool with_thumb_rotation) {
  FingerChain c;
  c.base_offset = base;
  int idx = first_index;
  if (with_thumb_rotation) {
    JointParams rot;
    rot.axis = Vec3::UnitZ();
    rot.offset = Vec3::Zero();
    rot.limit_lo = -1.0;
    rot.limit_hi = 1.0;
    rot.stiffness = 60.0;
    rot.damping = 5.0;
    c.joints.push_back(rot);
    c.joint_indices.push_back(idx++);
  }
  // Proximal, middle, distal curl segments; links extend along +z and
  // curl about the local x axis.
  c.joints.push_back(curl_joint(Vec3(0, 0, 0.0), 0.0, 1.6));
  c.joint_indices.push_back(idx++);
  c.joints.push_back(curl_joint(Vec3(0, 0, 0.045), 0.0, 1.7));
  c.joint_indices.push_back(idx++);
  c.joints.push_back(curl_joint(Vec3(0, 0, 0.035), 0.0, 1.7));
  c.joint_indices.push_back(idx++);
  c.tip_offset = Vec3(0, 0, 0.032);
  return c;
}

}  // namespace

JointChainModel make_default_model() {
  JointChainModel m;
  m.base_position = Vec3(0, 0, 0.81);  // table mounting height

  const double pi = 3.14159265358979323846;
  m.arm_joints = {
      arm_joint(Vec3::UnitZ(), Vec3(0, 0, 0.0892), -pi, pi),
      arm_joint(Vec3::UnitY(), Vec3(0, 0.135, 0), -pi, pi),
      arm_joint(Vec3::UnitY(), Vec3(0, 0, 0.425), -pi, pi),
      arm_joint(Vec3::UnitY(), Vec3(0, -0.119, 0.392), -pi, pi),
      arm_joint(Vec3::UnitZ(), Vec3(0, 0, 0.0997), -pi, pi),
      arm_joint(Vec3::UnitY(), Vec3(0, 0.0996, 0), -pi, pi),
  };
  m.palm_offset = Vec3(0, 0, 0.12);

  // Finger bases around the palm origin; thumb carries the extra rotation.
  m.fingers[0] = make_finger(Vec3(-0.035, 0.0, 0.01), 0, true);    // thumb: 4 joints
  m.fingers[1] = make_finger(Vec3(0.035, 0.028, 0.01), 4, false);  // index
  m.fingers[2] = make_finger(Vec3(0.035, 0.0, 0.01), 7, false);    // middle
  m.fingers[3] = make_finger(Vec3(0.035, -0.028, 0.01), 10, false);  // ring

  for (const FingerChain& f : m.fingers)
    for (const JointParams& j : f.joints) m.hand_joints.push_back(j);
  return m;
}

VecX default_arm_home() {
  VecX q(6);
  q << 0.0, 0.0, 1.9, -1.25, 0.0, 0.0;
  return q;
}

}  // namespace p2c
