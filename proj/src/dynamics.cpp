#include "p2c/dynamics.hpp"

#include <cmath>

namespace p2c {

JointState step_joints(const JointState& q, const VecX& target,
                       const std::vector<JointParams>& joints, double dt,
                       const VecX* stiffness_scale, const VecX* damping_scale) {
  const int n = q.count();
  if (target.size() != n || static_cast<int>(joints.size()) != n)
    throw DimensionError("step_joints: target/model size mismatch");
  if (!target.allFinite()) throw std::invalid_argument("step_joints: non-finite target");

  JointState out(n);
  for (int i = 0; i < n; ++i) {
    const JointParams& j = joints[static_cast<size_t>(i)];
    const double ks = j.stiffness * (stiffness_scale ? (*stiffness_scale)[i] : 1.0);
    const double kd = j.damping * (damping_scale ? (*damping_scale)[i] : 1.0);
    const double acc = ks * (target[i] - q.positions[i]) - kd * q.velocities[i];
    double vel = q.velocities[i] + acc * dt;
    double pos = q.positions[i] + vel * dt;
    if (pos < j.limit_lo) {
      pos = j.limit_lo;
      vel = 0.0;
    } else if (pos > j.limit_hi) {
      pos = j.limit_hi;
      vel = 0.0;
    }
    out.positions[i] = pos;
    out.velocities[i] = vel;
  }
  return out;
}

ObjectStepResult step_object(const ObjectState& obj, double dt, double table_height,
                             double table_half_x, double table_half_y) {
  ObjectStepResult res;
  ObjectState next = obj;
  next.linear_velocity.z() += kGravityZ * dt;
  next.position += next.linear_velocity * dt;

  const bool over_table = std::abs(next.position.x()) <= table_half_x &&
                          std::abs(next.position.y()) <= table_half_y;
  const double plane = over_table ? table_height : 0.0;
  const double lowest = next.position.z() - next.half_extents.z();
  if (lowest < plane && next.linear_velocity.z() < 0.0) {
    next.position.z() = plane + next.half_extents.z();
    next.linear_velocity.z() = -next.linear_velocity.z() * next.restitution;
    res.bounced = true;
  }
  res.state = next;
  return res;
}

}  // namespace p2c
