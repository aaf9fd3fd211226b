#pragma once

#include "p2c/mlp.hpp"

namespace p2c {

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian head with a state-independent log-std vector.
struct GaussianPolicyHead {
  VecX log_std;  // one per action dim, clamped to [kLogStdMin, kLogStdMax]

  static GaussianPolicyHead create(int action_dim) {
    GaussianPolicyHead h;
    h.log_std = VecX::Zero(action_dim);
    return h;
  }

  void clamp();
  int action_dim() const { return static_cast<int>(log_std.size()); }
};

struct SampleResult {
  VecX action;
  double log_prob = 0.0;
};

SampleResult gaussian_sample(const GaussianPolicyHead& head, const VecX& mean, Rng& rng);
double gaussian_log_prob(const GaussianPolicyHead& head, const VecX& mean, const VecX& action);
double gaussian_entropy(const GaussianPolicyHead& head);

// Batched log-probs and per-sample gradient helpers used by the PPO update.
VecX gaussian_log_prob_batch(const GaussianPolicyHead& head, const MatX& means,
                             const MatX& actions);
// d log_prob / d mean, one row per sample.
MatX gaussian_log_prob_grad_mean(const GaussianPolicyHead& head, const MatX& means,
                                 const MatX& actions);
// d log_prob / d log_std (per sample x dim).
MatX gaussian_log_prob_grad_log_std(const GaussianPolicyHead& head, const MatX& means,
                                    const MatX& actions);

}  // namespace p2c
