// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
//
// Stacked multi-scale residual convolution (SMRC) followed by a
// bidirectional LSTM.
#pragma once

#include <cstddef>
#include <vector>

#include "mixtts/embedding.hpp"
#include "mixtts/nn/layers.hpp"
#include "mixtts/nn/params.hpp"

namespace mixtts {

struct SmrcStack {
  std::vector<nn::Tensor> branch_weights;  // [(k * C) x branch_channels] per kernel
  std::vector<nn::Tensor> branch_biases;   // [1 x branch_channels]
  nn::Tensor gamma;                        // [1 x C]
  nn::Tensor beta;                         // [1 x C]
  nn::RunningStats stats;
};

struct EncoderParams {
  std::vector<std::size_t> kernels;  // {1, 3, 5}
  nn::LinearParams input_projection;  // d -> C, C = kernels.size() * branch_channels
  std::vector<SmrcStack> stacks;
  nn::LstmParams forward;
  nn::LstmParams backward;

  static EncoderParams init(std::size_t embedding_dim, std::size_t stacks,
                            std::size_t branch_channels, std::vector<std::size_t> kernels,
                            std::size_t hidden, double lstm_init_scale, Rng& rng);

  std::size_t channels() const { return input_projection.weight.cols(); }
  std::size_t memory_dim() const { return 2 * forward.hidden(); }
  void register_tensors(nn::NamedTensors& out, const std::string& prefix) const;
};

struct EncoderOutput {
  nn::Tensor memory;  // [T x 2 * hidden]
  std::size_t length() const { return memory.rows(); }
};

/// One stack: branches -> channel concat -> batch norm -> ReLU -> + input.
nn::Tensor smrc_stack_forward(const nn::Tensor& x, SmrcStack& stack,
                              const std::vector<std::size_t>& kernels, nn::Mode mode);

/// Input projection followed by every stack. Output is [T x C].
nn::Tensor smrc_forward(const EmbeddedSequence& e_f, EncoderParams& params, nn::Mode mode);

/// Forward LSTM over rows, backward LSTM over reversed rows, concatenated
/// per position as [h_forward; h_backward].
nn::Tensor bidirectional_lstm(const nn::Tensor& x, const nn::LstmParams& forward,
                              const nn::LstmParams& backward);

EncoderOutput encode(const EmbeddedSequence& e_f, EncoderParams& params, nn::Mode mode);

}  // namespace mixtts
