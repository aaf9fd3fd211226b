#pragma once

#include "p2c/kinematics.hpp"
#include "p2c/types.hpp"

namespace p2c {

// One semi-implicit Euler step of the unit-inertia PD model
//   qdd = stiffness*(target - q) - damping*qd
// over the joints described by `joints`, followed by limit clamping with the
// velocity zeroed at the clamp. Gains may be scaled per joint.
JointState step_joints(const JointState& q, const VecX& target,
                       const std::vector<JointParams>& joints, double dt,
                       const VecX* stiffness_scale = nullptr,
                       const VecX* damping_scale = nullptr);

struct ObjectStepResult {
  ObjectState state;
  bool bounced = false;
};

// Ballistic semi-implicit Euler step with restitution bounce against the
// table plane (within the table's horizontal extent) or the floor.
ObjectStepResult step_object(const ObjectState& obj, double dt, double table_height,
                             double table_half_x = 0.8, double table_half_y = 0.8);

}  // namespace p2c
