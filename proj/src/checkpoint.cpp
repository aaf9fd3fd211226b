#include "p2c/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

namespace p2c {

namespace {

constexpr char kMagic[8] = {'P', '2', 'C', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_i64(std::ostream& out, std::int64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_string(std::ostream& out, const std::string& s) {
  write_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void write_doubles(std::ostream& out, const double* data, std::uint64_t count) {
  write_u64(out, count);
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(count * sizeof(double)));
}

void write_vec(std::ostream& out, const VecX& v) {
  write_doubles(out, v.data(), static_cast<std::uint64_t>(v.size()));
}

void write_mat(std::ostream& out, const MatX& m) {
  write_u64(out, static_cast<std::uint64_t>(m.rows()));
  write_u64(out, static_cast<std::uint64_t>(m.cols()));
  // Row-major on disk.
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out.write(reinterpret_cast<const char*>(&m(r, c)), sizeof(double));
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

std::int64_t read_i64(std::istream& in) {
  std::int64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

std::string read_string(std::istream& in) {
  const std::uint64_t n = read_u64(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

VecX read_vec(std::istream& in) {
  const std::uint64_t n = read_u64(in);
  VecX v(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

MatX read_mat(std::istream& in) {
  const auto rows = static_cast<Eigen::Index>(read_u64(in));
  const auto cols = static_cast<Eigen::Index>(read_u64(in));
  MatX m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      in.read(reinterpret_cast<char*>(&m(r, c)), sizeof(double));
      if (!in) throw std::runtime_error("checkpoint: truncated file");
    }
  return m;
}

void write_mlp(std::ostream& out, const Mlp& net) {
  write_u64(out, static_cast<std::uint64_t>(net.spec.input));
  write_u64(out, net.spec.hidden.size());
  for (int h : net.spec.hidden) write_u64(out, static_cast<std::uint64_t>(h));
  write_u64(out, static_cast<std::uint64_t>(net.spec.output));
  write_u64(out, net.spec.activation == Activation::Elu ? 0 : 1);
  write_u64(out, net.params.w.size());
  for (size_t l = 0; l < net.params.w.size(); ++l) {
    write_mat(out, net.params.w[l]);
    write_vec(out, net.params.b[l]);
  }
}

Mlp read_mlp(std::istream& in) {
  Mlp net;
  net.spec.input = static_cast<int>(read_u64(in));
  const std::uint64_t nh = read_u64(in);
  net.spec.hidden.clear();
  for (std::uint64_t i = 0; i < nh; ++i) net.spec.hidden.push_back(static_cast<int>(read_u64(in)));
  net.spec.output = static_cast<int>(read_u64(in));
  net.spec.activation = read_u64(in) == 0 ? Activation::Elu : Activation::Relu;
  const std::uint64_t layers = read_u64(in);
  for (std::uint64_t l = 0; l < layers; ++l) {
    net.params.w.push_back(read_mat(in));
    net.params.b.push_back(read_vec(in));
  }
  return net;
}

void write_adam(std::ostream& out, const AdamState& s) {
  write_i64(out, s.step);
  write_doubles(out, &s.beta1, 1);
  write_doubles(out, &s.beta2, 1);
  write_doubles(out, &s.epsilon, 1);
  write_doubles(out, &s.learning_rate, 1);
  write_i64(out, s.skipped_updates);
  write_u64(out, s.m_w.size());
  for (size_t l = 0; l < s.m_w.size(); ++l) {
    write_mat(out, s.m_w[l]);
    write_mat(out, s.v_w[l]);
    write_vec(out, s.m_b[l]);
    write_vec(out, s.v_b[l]);
  }
}

AdamState read_adam(std::istream& in) {
  AdamState s;
  s.step = read_i64(in);
  auto read_counted_d = [&in]() {
    if (read_u64(in) != 1) throw std::runtime_error("checkpoint: bad scalar block");
    double v;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
  };
  s.beta1 = read_counted_d();
  s.beta2 = read_counted_d();
  s.epsilon = read_counted_d();
  s.learning_rate = read_counted_d();
  s.skipped_updates = read_i64(in);
  const std::uint64_t layers = read_u64(in);
  for (std::uint64_t l = 0; l < layers; ++l) {
    s.m_w.push_back(read_mat(in));
    s.v_w.push_back(read_mat(in));
    s.m_b.push_back(read_vec(in));
    s.v_b.push_back(read_vec(in));
  }
  return s;
}

}  // namespace

void Checkpoint::save(const std::string& path) const {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot write " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, config_fingerprint);
    write_string(out, variant);
    write_i64(out, iteration);
    write_i64(out, env_steps);
    write_string(out, rng_state);
    write_u64(out, agents.size());
    for (const Agent& a : agents) {
      write_string(out, a.role);
      write_mlp(out, a.policy);
      write_vec(out, a.head.log_std);
      write_mlp(out, a.critic);
      write_adam(out, a.policy_opt);
      write_adam(out, a.critic_opt);
      write_i64(out, a.training_steps);
    }
    if (!out) throw std::runtime_error("checkpoint: write failure on " + tmp.string());
  }
  fs::rename(tmp, target);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  Checkpoint c;
  c.config_fingerprint = read_u64(in);
  c.variant = read_string(in);
  c.iteration = read_i64(in);
  c.env_steps = read_i64(in);
  c.rng_state = read_string(in);
  const std::uint64_t n = read_u64(in);
  for (std::uint64_t i = 0; i < n; ++i) {
    Agent a;
    a.role = read_string(in);
    a.policy = read_mlp(in);
    a.head.log_std = read_vec(in);
    a.critic = read_mlp(in);
    a.policy_opt = read_adam(in);
    a.critic_opt = read_adam(in);
    a.training_steps = read_i64(in);
    c.agents.push_back(std::move(a));
  }
  return c;
}

}  // namespace p2c
