// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "mixtts/nn/ops.hpp"
#include "mixtts/nn/tensor.hpp"
#include "mixtts/random.hpp"

namespace mixtts::nn {

enum class Mode { kTrain, kEval };

/// Per-feature running statistics, stored as non-trainable 1 x C tensors so
/// they serialize alongside parameters.
struct RunningStats {
  Tensor mean;
  Tensor var;

  static RunningStats identity(std::size_t features);
};

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

/// Normalizes each column of x [N x C]. Train mode uses batch statistics
/// (biased variance) and folds them into `stats` with momentum 0.9; eval
/// mode uses `stats`. Throws DegenerateBatch for N < 2 in train mode.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, RunningStats& stats,
                  Mode mode);

struct LstmCellState {
  Tensor h;
  Tensor c;

  static LstmCellState zeros(std::size_t batch, std::size_t hidden);
};

/// Fused gate weights for [x; h] -> (input, forget, candidate, output).
struct LstmParams {
  Tensor weight;  // [(input + hidden) x 4*hidden]
  Tensor bias;    // [1 x 4*hidden]

  std::size_t hidden() const { return bias.cols() / 4; }
  std::size_t input() const { return weight.rows() - hidden(); }
};

/// One LSTM step over a batch x [B x input]. With `active` cell dropout, the
/// candidate update tanh(g) entering c is multiplied by a Bernoulli(keep)/keep
/// mask. Returns (h, new state); h is also new_state.h.
std::pair<Tensor, LstmCellState> lstm_step(const Tensor& x, const LstmCellState& state,
                                           const LstmParams& params, double cell_keep_prob,
                                           Rng& rng, bool active);

// Initializers ---------------------------------------------------------------

/// Normal(0, stddev) truncated to +-2 stddev by resampling.
std::vector<double> truncated_normal(std::size_t count, double stddev, Rng& rng);
/// rows x cols matrix with orthonormal columns (or rows when rows < cols).
std::vector<double> orthonormal(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace mixtts::nn
