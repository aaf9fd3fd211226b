#pragma once

#include "p2c/kinematics.hpp"
#include "p2c/types.hpp"

#include <iosfwd>
#include <string>

namespace p2c {

// One recorded joint trajectory sampled at physics_dt.
struct SysidTrajectory {
  int joint = 0;  // arm joint index
  std::vector<double> target;
  std::vector<double> measured;
};

struct SysidResult {
  VecX stiffness_scale;  // one per arm joint; 1.0 where no data was given
  VecX damping_scale;
  double residual_mse = 0.0;
};

// Fits per-joint stiffness/damping scales by minimizing the MSE between the
// step_joints rollout and the measured trajectory. Coordinate descent over a
// log-spaced grid, then multiplicative local refinement.
SysidResult sysid_fit(const std::vector<SysidTrajectory>& recorded, const JointChainModel& model,
                      double dt, double init_stiffness_scale = 1.0,
                      double init_damping_scale = 1.0);

// Mean squared position error of the step_joints rollout against `measured`,
// for one joint at the given gain scales.
double sysid_trajectory_mse(const SysidTrajectory& traj, const JointParams& joint, double dt,
                            double stiffness_scale, double damping_scale);

// Simulates a trajectory with known scales; used to build test and demo data.
SysidTrajectory sysid_simulate(const std::vector<double>& target, int joint,
                               const JointChainModel& model, double dt, double stiffness_scale,
                               double damping_scale);

// CSV with header `t,joint,target,measured`.
std::vector<SysidTrajectory> read_sysid_csv(std::istream& in);
std::vector<SysidTrajectory> read_sysid_csv_file(const std::string& path);
void write_sysid_csv(std::ostream& out, const std::vector<SysidTrajectory>& trajectories,
                     double dt);

}  // namespace p2c
