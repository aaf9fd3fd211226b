#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace p2c {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kGravityZ = -9.81;

// 120 Hz physics, 30 Hz control.
struct SimClock {
  double physics_dt = 1.0 / 120.0;
  int decimation = 4;

  double control_dt() const { return physics_dt * decimation; }
};

struct JointState {
  VecX positions;
  VecX velocities;

  JointState() = default;
  explicit JointState(int n) : positions(VecX::Zero(n)), velocities(VecX::Zero(n)) {}

  int count() const { return static_cast<int>(positions.size()); }
};

struct PalmPose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
};

struct ObjectState {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
  double mass = 0.1;
  double restitution = 0.0;
  Vec3 half_extents = Vec3(0.05, 0.05, 0.05);
};

struct EventFlags {
  bool succ = false;
  bool drop = false;
  bool app = false;
  bool coll = false;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace p2c
