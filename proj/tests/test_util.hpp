// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "mixtts/random.hpp"

namespace mixtts::testing {

/// First seed whose Bernoulli(p) draws start with `pattern`.
inline std::uint64_t seed_for_draws(const std::vector<bool>& pattern, double p = 0.5) {
  for (std::uint64_t seed = 0;; ++seed) {
    Rng rng(seed);
    bool ok = true;
    for (bool want : pattern) ok = ok && rng.bernoulli(p) == want;
    if (ok) return seed;
  }
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mixtts_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

inline void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

}  // namespace mixtts::testing
