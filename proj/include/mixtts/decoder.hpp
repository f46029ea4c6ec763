// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
//
// Attention decoder: pre-net with always-on dropout, Gaussian-mixture
// attention whose means advance by a softplus step, skip-connected LSTM
// decode layers with cell dropout and a linear projection to one mel frame
// per step.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mixtts/matrix.hpp"
#include "mixtts/nn/layers.hpp"
#include "mixtts/nn/params.hpp"

namespace mixtts {

struct DecoderConfig {
  std::size_t n_mels = 80;
  std::size_t prenet_layers = 2;
  std::size_t prenet_hidden = 128;
  double prenet_keep_prob = 0.5;
  std::size_t attention_hidden = 512;
  std::size_t mixtures = 10;
  /// Initial bias of the mean-step pre-activation; softplus(-1.5) ~ 0.2
  /// positions per frame.
  double attention_step_bias = -1.5;
  std::size_t decoder_layers = 2;
  std::size_t decoder_hidden = 512;
  double cell_keep_prob = 0.925;
  double lstm_init_scale = 0.075;
};

struct DecoderParams {
  DecoderConfig config;
  std::vector<nn::LinearParams> prenet;
  nn::LstmParams attention_lstm;    // input [prenet; context]
  nn::LinearParams attention_head;  // hidden -> 3K: (alpha_hat, beta_hat, kappa_hat)
  std::vector<nn::LstmParams> layers;
  nn::LinearParams projection;      // h_last -> n_mels

  static DecoderParams init(const DecoderConfig& config, std::size_t memory_dim, Rng& rng);
  std::size_t memory_dim() const;
  void register_tensors(nn::NamedTensors& out, const std::string& prefix) const;
};

struct AttentionState {
  nn::Tensor kappa;    // [B x K] mixture means, in encoder positions
  nn::Tensor alpha;    // [B x K]
  nn::Tensor beta;     // [B x K]
  nn::Tensor context;  // [B x memory_dim], previous attention read
  nn::LstmCellState lstm;
};

struct DecoderState {
  AttentionState attention;
  std::vector<nn::LstmCellState> layers;
  nn::Tensor prev_frame;  // [B x n_mels]

  /// kappa = 0, context = 0, prev_frame = 0, zero LSTM states; alpha and
  /// beta start at 1 (exp(0)).
  static DecoderState initial(const DecoderParams& params, std::size_t batch);
  std::size_t batch() const { return prev_frame.rows(); }
  /// Same values, cut from any graph.
  DecoderState detached() const;
  /// Detached copy with lanes where `reset[b]` is true set to the initial state.
  DecoderState reset_lanes(const std::vector<bool>& reset, const DecoderParams& params) const;
  /// Sum of squares over every state entry of lane b.
  double lane_norm(std::size_t lane) const;
};

/// phi[b, u] = sum_k alpha[b,k] exp(-beta[b,k] (kappa[b,k] - u)^2) for
/// u < lengths[b], zero beyond. Unnormalized. Output [B x max(lengths)].
nn::Tensor gm_attention_weights(const nn::Tensor& alpha, const nn::Tensor& beta,
                                const nn::Tensor& kappa, std::span<const std::size_t> lengths);

/// context[b] = sum_u phi[b, u] * memories[b][u].
nn::Tensor attend(const nn::Tensor& phi, std::span<const nn::Tensor> memories);

/// Linear layers each followed by dropout; dropout is always active.
nn::Tensor prenet(const nn::Tensor& frame, const DecoderParams& params, Rng& rng);

struct AttentionStep {
  nn::Tensor context;
  nn::Tensor phi;
  AttentionState state;
};

/// Attention LSTM over [prenet_out; previous context], head -> (alpha, beta,
/// kappa step), alpha = exp, beta = exp, kappa += softplus(step).
/// Throws EmptyMemory when any lane has no encoder positions.
AttentionStep gm_attention_step(const nn::Tensor& prenet_out, const AttentionState& state,
                                std::span<const nn::Tensor> memories,
                                const DecoderParams& params);

struct DecodeStep {
  nn::Tensor frame;  // [B x n_mels]
  DecoderState state;
};

/// One decoder step. Cell dropout is active in train mode only; pre-net
/// dropout is always active. The returned state's prev_frame is the
/// prediction; teacher forcing overwrites it.
DecodeStep decode_step(const DecoderState& state, std::span<const nn::Tensor> memories,
                       const DecoderParams& params, Rng& rng, nn::Mode mode);

/// Frames laid out [B x S x n_mels], row-major.
struct FrameBatch {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::size_t dims = 0;
  std::vector<double> data;

  FrameBatch() = default;
  FrameBatch(std::size_t b, std::size_t s, std::size_t d)
      : batch(b), steps(s), dims(d), data(b * s * d, 0.0) {}
  double& at(std::size_t b, std::size_t s, std::size_t d) { return data[(b * steps + s) * dims + d]; }
  double at(std::size_t b, std::size_t s, std::size_t d) const {
    return data[(b * steps + s) * dims + d];
  }
  /// [B x dims] slice at step s.
  nn::Tensor step(std::size_t s) const;
};

struct TeacherForcedResult {
  nn::Tensor loss;  // scalar mean over B * S * n_mels
  DecoderState final_state;
};

/// Steps the decoder S times feeding ground-truth previous frames (the first
/// step uses state.prev_frame). MSE over every value, no masking.
TeacherForcedResult teacher_forced_loss(const FrameBatch& frames, const DecoderState& state,
                                        std::span<const nn::Tensor> memories,
                                        const DecoderParams& params, Rng& rng, nn::Mode mode);

struct GenerationResult {
  Matrix frames;                            // [N x n_mels], model (normalized) domain
  std::vector<std::vector<double>> kappa;   // per step, K means
  bool stopped_by_attention = false;
};

inline constexpr double kStopMargin = 2.0;
inline constexpr std::size_t kStopPatience = 5;

/// Free-running single-utterance decode feeding predictions back through the
/// pre-net. Stops when the alpha-weighted mean of kappa exceeds
/// T - 1 + kStopMargin for kStopPatience consecutive steps, or at max_frames.
/// With stop_on_attention false it always produces max_frames frames.
/// Throws NonFiniteFrame on divergence.
GenerationResult generate_frames(const nn::Tensor& memory, const DecoderParams& params,
                                 std::size_t max_frames, Rng& rng,
                                 bool stop_on_attention = true);

}  // namespace mixtts
