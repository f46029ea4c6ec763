// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include "mixtts/nn/params.hpp"

namespace mixtts::nn {

LinearParams LinearParams::orthonormal_init(std::size_t in, std::size_t out, Rng& rng) {
  return {Tensor::parameter({in, out}, orthonormal(in, out, rng)),
          Tensor::parameter({1, out}, std::vector<double>(out, 0.0))};
}

LinearParams LinearParams::truncated_normal_init(std::size_t in, std::size_t out, double stddev,
                                                 Rng& rng) {
  return {Tensor::parameter({in, out}, truncated_normal(in * out, stddev, rng)),
          Tensor::parameter({1, out}, std::vector<double>(out, 0.0))};
}

LstmParams lstm_init(std::size_t input, std::size_t hidden, double stddev, Rng& rng) {
  std::vector<double> bias(4 * hidden, 0.0);
  // Forget gate starts open.
  for (std::size_t j = hidden; j < 2 * hidden; ++j) bias[j] = 1.0;
  return {Tensor::parameter({input + hidden, 4 * hidden},
                            truncated_normal((input + hidden) * 4 * hidden, stddev, rng)),
          Tensor::parameter({1, 4 * hidden}, std::move(bias))};
}

void register_linear(NamedTensors& out, const std::string& prefix, const LinearParams& p) {
  out.emplace(prefix + "/weight", p.weight);
  out.emplace(prefix + "/bias", p.bias);
}

void register_lstm(NamedTensors& out, const std::string& prefix, const LstmParams& p) {
  out.emplace(prefix + "/weight", p.weight);
  out.emplace(prefix + "/bias", p.bias);
}

}  // namespace mixtts::nn
