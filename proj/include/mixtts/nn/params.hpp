// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#pragma once

#include <map>
#include <string>

#include "mixtts/nn/layers.hpp"
#include "mixtts/nn/tensor.hpp"
#include "mixtts/random.hpp"

namespace mixtts::nn {

struct LinearParams {
  Tensor weight;  // [in x out]
  Tensor bias;    // [1 x out]

  static LinearParams orthonormal_init(std::size_t in, std::size_t out, Rng& rng);
  static LinearParams truncated_normal_init(std::size_t in, std::size_t out, double stddev,
                                            Rng& rng);
  Tensor operator()(const Tensor& x) const { return linear(x, weight, bias); }
};

LstmParams lstm_init(std::size_t input, std::size_t hidden, double stddev, Rng& rng);

/// Ordered name -> tensor registry. Handles share storage with the model, so
/// writing through the registry updates the model in place.
using NamedTensors = std::map<std::string, Tensor>;

void register_linear(NamedTensors& out, const std::string& prefix, const LinearParams& p);
void register_lstm(NamedTensors& out, const std::string& prefix, const LstmParams& p);

}  // namespace mixtts::nn
