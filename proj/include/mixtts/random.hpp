// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace mixtts {

/// Seeded random source passed explicitly to everything stochastic.
///
/// Distributions are constructed per draw so the engine state alone
/// determines the future stream; `serialize` / `deserialize` capture it
/// exactly for checkpoint resume.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t next_u64() { return engine_(); }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  /// Independent child stream; deterministic in the parent state.
  Rng fork() { return Rng(engine_()); }

  std::mt19937_64& engine() { return engine_; }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }
  static Rng deserialize(const std::string& state) {
    Rng r;
    std::istringstream is(state);
    is >> r.engine_;
    return r;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mixtts
