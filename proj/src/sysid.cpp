#include "p2c/sysid.hpp"

#include "p2c/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace p2c {

double sysid_trajectory_mse(const SysidTrajectory& traj, const JointParams& joint, double dt,
                            double stiffness_scale, double damping_scale) {
  std::vector<JointParams> chain{joint};
  JointState q(1);  // recordings start from rest at the zero position
  VecX ks = VecX::Constant(1, stiffness_scale);
  VecX kd = VecX::Constant(1, damping_scale);
  double err = 0.0;
  VecX target(1);
  for (size_t t = 0; t < traj.target.size(); ++t) {
    target[0] = traj.target[t];
    q = step_joints(q, target, chain, dt, &ks, &kd);
    const double e = q.positions[0] - traj.measured[t];
    err += e * e;
  }
  return traj.target.empty() ? 0.0 : err / static_cast<double>(traj.target.size());
}

namespace {

double joint_mse(const std::vector<const SysidTrajectory*>& trajs, const JointParams& joint,
                 double dt, double ks, double kd) {
  double total = 0.0;
  size_t count = 0;
  for (const SysidTrajectory* t : trajs) {
    total += sysid_trajectory_mse(*t, joint, dt, ks, kd) * static_cast<double>(t->target.size());
    count += t->target.size();
  }
  return count ? total / static_cast<double>(count) : 0.0;
}

}  // namespace

SysidResult sysid_fit(const std::vector<SysidTrajectory>& recorded, const JointChainModel& model,
                      double dt, double init_stiffness_scale, double init_damping_scale) {
  if (recorded.empty()) throw std::invalid_argument("sysid_fit: no trajectories");
  const int n = static_cast<int>(model.arm_joints.size());
  std::map<int, std::vector<const SysidTrajectory*>> by_joint;
  for (const SysidTrajectory& t : recorded) {
    if (t.joint < 0 || t.joint >= n) throw std::invalid_argument("sysid_fit: joint index out of range");
    if (t.target.size() != t.measured.size())
      throw std::invalid_argument("sysid_fit: target/measured length mismatch");
    for (double v : t.measured)
      if (!std::isfinite(v)) throw std::invalid_argument("sysid_fit: non-finite measurement");
    by_joint[t.joint].push_back(&t);
  }

  SysidResult res;
  res.stiffness_scale = VecX::Ones(n);
  res.damping_scale = VecX::Ones(n);
  double total_err = 0.0;
  size_t total_count = 0;

  for (auto& [j, trajs] : by_joint) {
    const JointParams& joint = model.arm_joints[static_cast<size_t>(j)];
    double ks = init_stiffness_scale, kd = init_damping_scale;

    // Coordinate descent on a log-spaced grid around the current estimate.
    for (int round = 0; round < 4; ++round) {
      for (int coord = 0; coord < 2; ++coord) {
        double& v = coord == 0 ? ks : kd;
        double best_v = v;
        double best = joint_mse(trajs, joint, dt, ks, kd);
        for (int i = -16; i <= 16; ++i) {
          const double cand = v * std::pow(2.0, i / 8.0);
          const double err = coord == 0 ? joint_mse(trajs, joint, dt, cand, kd)
                                        : joint_mse(trajs, joint, dt, ks, cand);
          if (err < best) {
            best = err;
            best_v = cand;
          }
        }
        v = best_v;
      }
    }
    // Local multiplicative refinement with shrinking step.
    double step = std::pow(2.0, 1.0 / 8.0);
    double best = joint_mse(trajs, joint, dt, ks, kd);
    while (step > 1.0005) {
      bool improved = false;
      for (int coord = 0; coord < 2; ++coord) {
        for (double mult : {step, 1.0 / step}) {
          const double cks = coord == 0 ? ks * mult : ks;
          const double ckd = coord == 1 ? kd * mult : kd;
          const double err = joint_mse(trajs, joint, dt, cks, ckd);
          if (err < best) {
            best = err;
            ks = cks;
            kd = ckd;
            improved = true;
          }
        }
      }
      if (!improved) step = std::sqrt(step);
    }

    res.stiffness_scale[j] = ks;
    res.damping_scale[j] = kd;
    size_t count = 0;
    for (const SysidTrajectory* t : trajs) count += t->target.size();
    total_err += best * static_cast<double>(count);
    total_count += count;
  }
  res.residual_mse = total_count ? total_err / static_cast<double>(total_count) : 0.0;
  return res;
}

SysidTrajectory sysid_simulate(const std::vector<double>& target, int joint,
                               const JointChainModel& model, double dt, double stiffness_scale,
                               double damping_scale) {
  SysidTrajectory out;
  out.joint = joint;
  out.target = target;
  std::vector<JointParams> chain{model.arm_joints[static_cast<size_t>(joint)]};
  JointState q(1);
  VecX ks = VecX::Constant(1, stiffness_scale);
  VecX kd = VecX::Constant(1, damping_scale);
  VecX tgt(1);
  out.measured.reserve(target.size());
  for (double v : target) {
    tgt[0] = v;
    q = step_joints(q, tgt, chain, dt, &ks, &kd);
    out.measured.push_back(q.positions[0]);
  }
  return out;
}

std::vector<SysidTrajectory> read_sysid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("sysid csv: empty file");
  if (line != "t,joint,target,measured")
    throw std::runtime_error("sysid csv: bad header, expected t,joint,target,measured");
  std::map<int, SysidTrajectory> by_joint;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string t, j, tgt, meas;
    if (!std::getline(ss, t, ',') || !std::getline(ss, j, ',') || !std::getline(ss, tgt, ',') ||
        !std::getline(ss, meas))
      throw std::runtime_error("sysid csv: malformed row " + std::to_string(row));
    try {
      const int joint = std::stoi(j);
      auto& traj = by_joint[joint];
      traj.joint = joint;
      traj.target.push_back(std::stod(tgt));
      traj.measured.push_back(std::stod(meas));
    } catch (const std::exception&) {
      throw std::runtime_error("sysid csv: unparsable value at row " + std::to_string(row));
    }
  }
  std::vector<SysidTrajectory> out;
  for (auto& [j, traj] : by_joint) out.push_back(std::move(traj));
  if (out.empty()) throw std::runtime_error("sysid csv: no data rows");
  return out;
}

std::vector<SysidTrajectory> read_sysid_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("sysid csv: cannot open " + path);
  return read_sysid_csv(in);
}

void write_sysid_csv(std::ostream& out, const std::vector<SysidTrajectory>& trajectories,
                     double dt) {
  out << "t,joint,target,measured\n";
  out.precision(17);
  for (const SysidTrajectory& traj : trajectories)
    for (size_t i = 0; i < traj.target.size(); ++i)
      out << (static_cast<double>(i) + 1.0) * dt << ',' << traj.joint << ',' << traj.target[i]
          << ',' << traj.measured[i] << '\n';
}

}  // namespace p2c
