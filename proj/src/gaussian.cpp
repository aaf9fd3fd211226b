#include "p2c/gaussian.hpp"

#include <cmath>

namespace p2c {

namespace {
constexpr double kLogTwoPi = 1.8378770664093453;  // ln(2*pi)
}

void GaussianPolicyHead::clamp() {
  for (int i = 0; i < log_std.size(); ++i)
    log_std[i] = std::clamp(log_std[i], kLogStdMin, kLogStdMax);
}

SampleResult gaussian_sample(const GaussianPolicyHead& head, const VecX& mean, Rng& rng) {
  if (mean.size() != head.log_std.size()) throw DimensionError("gaussian_sample: dim mismatch");
  std::normal_distribution<double> gauss(0.0, 1.0);
  SampleResult res;
  res.action = mean;
  for (int i = 0; i < mean.size(); ++i)
    res.action[i] += std::exp(head.log_std[i]) * gauss(rng);
  res.log_prob = gaussian_log_prob(head, mean, res.action);
  return res;
}

double gaussian_log_prob(const GaussianPolicyHead& head, const VecX& mean, const VecX& action) {
  if (mean.size() != head.log_std.size() || action.size() != mean.size())
    throw DimensionError("gaussian_log_prob: dim mismatch");
  double lp = 0.0;
  for (int i = 0; i < mean.size(); ++i) {
    const double std = std::exp(head.log_std[i]);
    const double z = (action[i] - mean[i]) / std;
    lp += -0.5 * z * z - head.log_std[i] - 0.5 * kLogTwoPi;
  }
  return lp;
}

double gaussian_entropy(const GaussianPolicyHead& head) {
  double h = 0.0;
  for (int i = 0; i < head.log_std.size(); ++i)
    h += head.log_std[i] + 0.5 * (kLogTwoPi + 1.0);
  return h;
}

VecX gaussian_log_prob_batch(const GaussianPolicyHead& head, const MatX& means,
                             const MatX& actions) {
  const int n = static_cast<int>(means.rows());
  const int d = head.action_dim();
  if (means.cols() != d || actions.rows() != n || actions.cols() != d)
    throw DimensionError("gaussian_log_prob_batch: shape mismatch");
  const VecX inv_var = (-2.0 * head.log_std).array().exp();
  VecX lp = VecX::Constant(n, -head.log_std.sum() - 0.5 * kLogTwoPi * d);
  const MatX diff = actions - means;
  lp.array() -= 0.5 * (diff.array().square().matrix() * inv_var).array();
  return lp;
}

MatX gaussian_log_prob_grad_mean(const GaussianPolicyHead& head, const MatX& means,
                                 const MatX& actions) {
  const VecX inv_var = (-2.0 * head.log_std).array().exp();
  return (actions - means).array().rowwise() * inv_var.transpose().array();
}

MatX gaussian_log_prob_grad_log_std(const GaussianPolicyHead& head, const MatX& means,
                                    const MatX& actions) {
  const VecX inv_var = (-2.0 * head.log_std).array().exp();
  const MatX z2 = (actions - means).array().square().rowwise() * inv_var.transpose().array();
  return z2.array() - 1.0;
}

}  // namespace p2c
