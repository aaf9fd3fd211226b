#pragma once

#include "p2c/ppo.hpp"

#include <string>

namespace p2c {

// Versioned binary container: magic, version, config fingerprint, variant,
// per-agent networks (row-major doubles), optimizer state, log-std vectors,
// and the trainer counters. Round-trips bit-exactly.
struct Checkpoint {
  std::uint64_t config_fingerprint = 0;
  std::string variant;
  std::vector<Agent> agents;
  long iteration = 0;
  long env_steps = 0;
  std::string rng_state;  // serialized mt19937_64 stream state

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace p2c
