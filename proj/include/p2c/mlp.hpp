#pragma once

#include "p2c/randomization.hpp"
#include "p2c/types.hpp"

namespace p2c {

enum class Activation { Elu, Relu };

struct MlpSpec {
  int input = 0;
  std::vector<int> hidden = {512, 256, 128};
  int output = 0;
  Activation activation = Activation::Elu;

  void validate() const;
  std::vector<int> layer_sizes() const;  // input, hidden..., output
};

struct MlpGrads {
  std::vector<MatX> w;  // same shapes as ParameterSet
  std::vector<VecX> b;

  bool all_finite() const;
  void set_zero();
};

// Per-layer weights (in x out) and biases. Rows of activations are samples.
struct ParameterSet {
  std::vector<MatX> w;
  std::vector<VecX> b;

  int parameter_count() const;
  bool all_finite() const;
  VecX flatten() const;
  void unflatten(const VecX& flat);
};

struct MlpCache {
  MatX input;
  std::vector<MatX> pre;   // pre-activation per layer
  std::vector<MatX> post;  // post-activation per hidden layer
};

struct Mlp {
  MlpSpec spec;
  ParameterSet params;

  // Orthogonal initialization, gain sqrt(2) on hidden layers and
  // `final_gain` on the output layer; zero biases.
  static Mlp create(const MlpSpec& spec, Rng& rng, double final_gain = 1.0);

  MatX forward(const MatX& x, MlpCache* cache = nullptr) const;
  VecX forward_one(const VecX& x) const;

  // Reverse-mode gradients of the forward map; also returns d(loss)/d(input)
  // when grad_input is non-null.
  MlpGrads backward(const MlpCache& cache, const MatX& grad_output,
                    MatX* grad_input = nullptr) const;

  MlpGrads zero_grads() const;
};

struct AdamState {
  std::vector<MatX> m_w, v_w;
  std::vector<VecX> m_b, v_b;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 3e-4;
  long skipped_updates = 0;  // non-finite gradient incidents

  static AdamState create(const ParameterSet& params, double learning_rate);
};

// Bias-corrected Adam. Non-finite gradients skip the update and count an
// incident; returns false in that case.
bool adam_step(ParameterSet& params, const MlpGrads& grads, AdamState& state);

double elu(double x);
double activation_apply(Activation act, double x);
double activation_derivative(Activation act, double pre);

}  // namespace p2c
