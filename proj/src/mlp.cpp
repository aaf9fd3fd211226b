#include "p2c/mlp.hpp"

#include <Eigen/QR>

#include <cmath>

namespace p2c {

void MlpSpec::validate() const {
  if (input <= 0 || output <= 0) throw ConfigError("mlp: input/output widths must be > 0");
  if (hidden.empty()) throw ConfigError("mlp: at least one hidden layer required");
  for (int h : hidden)
    if (h <= 0) throw ConfigError("mlp: hidden widths must be > 0");
}

std::vector<int> MlpSpec::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(input);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output);
  return sizes;
}

double elu(double x) { return x > 0 ? x : std::expm1(x); }

double activation_apply(Activation act, double x) {
  return act == Activation::Elu ? elu(x) : (x > 0 ? x : 0.0);
}

double activation_derivative(Activation act, double pre) {
  if (act == Activation::Elu) return pre > 0 ? 1.0 : std::exp(pre);
  return pre > 0 ? 1.0 : 0.0;
}

int ParameterSet::parameter_count() const {
  int n = 0;
  for (const MatX& m : w) n += static_cast<int>(m.size());
  for (const VecX& v : b) n += static_cast<int>(v.size());
  return n;
}

bool ParameterSet::all_finite() const {
  for (const MatX& m : w)
    if (!m.allFinite()) return false;
  for (const VecX& v : b)
    if (!v.allFinite()) return false;
  return true;
}

VecX ParameterSet::flatten() const {
  VecX flat(parameter_count());
  int at = 0;
  for (const MatX& m : w) {
    flat.segment(at, m.size()) = Eigen::Map<const VecX>(m.data(), m.size());
    at += static_cast<int>(m.size());
  }
  for (const VecX& v : b) {
    flat.segment(at, v.size()) = v;
    at += static_cast<int>(v.size());
  }
  return flat;
}

void ParameterSet::unflatten(const VecX& flat) {
  if (flat.size() != parameter_count()) throw DimensionError("unflatten: size mismatch");
  int at = 0;
  for (MatX& m : w) {
    Eigen::Map<VecX>(m.data(), m.size()) = flat.segment(at, m.size());
    at += static_cast<int>(m.size());
  }
  for (VecX& v : b) {
    v = flat.segment(at, v.size());
    at += static_cast<int>(v.size());
  }
}

bool MlpGrads::all_finite() const {
  for (const MatX& m : w)
    if (!m.allFinite()) return false;
  for (const VecX& v : b)
    if (!v.allFinite()) return false;
  return true;
}

void MlpGrads::set_zero() {
  for (MatX& m : w) m.setZero();
  for (VecX& v : b) v.setZero();
}

namespace {

MatX orthogonal_matrix(int rows, int cols, Rng& rng, double gain) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const bool transpose = rows < cols;
  const int r = transpose ? cols : rows;
  const int c = transpose ? rows : cols;
  MatX a(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) a(i, j) = gauss(rng);
  Eigen::HouseholderQR<MatX> qr(a);
  MatX q = qr.householderQ() * MatX::Identity(r, c);
  const MatX rmat = qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
  for (int j = 0; j < c; ++j)
    if (rmat(j, j) < 0) q.col(j) *= -1.0;
  if (transpose) return gain * q.transpose();
  return gain * q;
}

}  // namespace

Mlp Mlp::create(const MlpSpec& spec, Rng& rng, double final_gain) {
  spec.validate();
  Mlp net;
  net.spec = spec;
  const std::vector<int> sizes = spec.layer_sizes();
  const int layers = static_cast<int>(sizes.size()) - 1;
  for (int l = 0; l < layers; ++l) {
    const bool last = l == layers - 1;
    const double gain = last ? final_gain : std::sqrt(2.0);
    net.params.w.push_back(orthogonal_matrix(sizes[l], sizes[l + 1], rng, gain));
    net.params.b.push_back(VecX::Zero(sizes[l + 1]));
  }
  return net;
}

MatX Mlp::forward(const MatX& x, MlpCache* cache) const {
  if (x.cols() != spec.input) throw DimensionError("mlp forward: input width mismatch");
  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
  }
  MatX a = x;
  const int layers = static_cast<int>(params.w.size());
  for (int l = 0; l < layers; ++l) {
    MatX z = (a * params.w[l]).rowwise() + params.b[l].transpose();
    if (cache) cache->pre.push_back(z);
    if (l < layers - 1) {
      a = z.unaryExpr([act = spec.activation](double v) { return activation_apply(act, v); });
      if (cache) cache->post.push_back(a);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

VecX Mlp::forward_one(const VecX& x) const {
  return forward(MatX(x.transpose())).row(0).transpose();
}

MlpGrads Mlp::zero_grads() const {
  MlpGrads g;
  for (const MatX& m : params.w) g.w.push_back(MatX::Zero(m.rows(), m.cols()));
  for (const VecX& v : params.b) g.b.push_back(VecX::Zero(v.size()));
  return g;
}

MlpGrads Mlp::backward(const MlpCache& cache, const MatX& grad_output, MatX* grad_input) const {
  const int layers = static_cast<int>(params.w.size());
  if (static_cast<int>(cache.pre.size()) != layers)
    throw std::logic_error("mlp backward: cache does not match network");
  if (grad_output.rows() != cache.input.rows() || grad_output.cols() != spec.output)
    throw DimensionError("mlp backward: upstream gradient shape mismatch");

  MlpGrads grads = zero_grads();
  MatX delta = grad_output;  // d loss / d pre-activation of current layer
  for (int l = layers - 1; l >= 0; --l) {
    const MatX& layer_in = l == 0 ? cache.input : cache.post[static_cast<size_t>(l - 1)];
    grads.w[static_cast<size_t>(l)].noalias() = layer_in.transpose() * delta;
    grads.b[static_cast<size_t>(l)] = delta.colwise().sum().transpose();
    if (l > 0 || grad_input) {
      MatX back = delta * params.w[static_cast<size_t>(l)].transpose();
      if (l > 0) {
        const MatX& pre = cache.pre[static_cast<size_t>(l - 1)];
        delta = back.binaryExpr(pre, [act = spec.activation](double g, double z) {
          return g * activation_derivative(act, z);
        });
      } else if (grad_input) {
        *grad_input = std::move(back);
      }
    }
  }
  return grads;
}

AdamState AdamState::create(const ParameterSet& params, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (const MatX& m : params.w) {
    s.m_w.push_back(MatX::Zero(m.rows(), m.cols()));
    s.v_w.push_back(MatX::Zero(m.rows(), m.cols()));
  }
  for (const VecX& v : params.b) {
    s.m_b.push_back(VecX::Zero(v.size()));
    s.v_b.push_back(VecX::Zero(v.size()));
  }
  return s;
}

bool adam_step(ParameterSet& params, const MlpGrads& grads, AdamState& state) {
  if (!grads.all_finite()) {
    ++state.skipped_updates;
    return false;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const double alpha = state.learning_rate * std::sqrt(c2) / c1;
  for (size_t l = 0; l < params.w.size(); ++l) {
    state.m_w[l] = state.beta1 * state.m_w[l] + (1 - state.beta1) * grads.w[l];
    state.v_w[l] = state.beta2 * state.v_w[l] + (1 - state.beta2) * grads.w[l].cwiseProduct(grads.w[l]);
    params.w[l].array() -=
        alpha * state.m_w[l].array() / (state.v_w[l].array().sqrt() + state.epsilon * std::sqrt(c2));
    state.m_b[l] = state.beta1 * state.m_b[l] + (1 - state.beta1) * grads.b[l];
    state.v_b[l] = state.beta2 * state.v_b[l] + (1 - state.beta2) * grads.b[l].cwiseProduct(grads.b[l]);
    params.b[l].array() -=
        alpha * state.m_b[l].array() / (state.v_b[l].array().sqrt() + state.epsilon * std::sqrt(c2));
  }
  return true;
}

}  // namespace p2c
