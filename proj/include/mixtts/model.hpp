// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
//
// The full text-to-mel network: mixing embedding, encoder and attention
// decoder, with a flat name -> tensor view used by the optimizer and
// checkpoints.
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mixtts/decoder.hpp"
#include "mixtts/embedding.hpp"
#include "mixtts/encoder.hpp"

namespace mixtts {

struct ModelConfig {
  std::size_t vocab_size = 49;
  std::size_t embedding_dim = 15;
  std::size_t smrc_stacks = 3;
  std::size_t smrc_channels = 128;  // per branch
  std::vector<std::size_t> smrc_kernels{1, 3, 5};
  std::size_t encoder_hidden = 128;  // per direction
  DecoderConfig decoder;

  /// Full-size settings.
  static ModelConfig full();
  /// Full settings with every hidden size divided by four.
  static ModelConfig desk();
  /// Small network for overfitting a handful of utterances.
  static ModelConfig toy();
};

struct Model {
  ModelConfig config;
  EmbeddingTables embedding;
  EncoderParams encoder;
  DecoderParams decoder;

  static Model init(const ModelConfig& config, Rng& rng);

  /// Every tensor, including batch-norm running statistics.
  nn::NamedTensors named_tensors() const;
  /// Trainable tensors only, in name order.
  std::vector<std::pair<std::string, nn::Tensor>> parameters() const;
  /// Copies values by name. Throws ShapeMismatch on missing names or shapes.
  void load_values(const std::map<std::string, Matrix>& values);

  EncoderOutput encode(const text::MixedSequence& seq, nn::Mode mode);
  /// Eval-mode encoding then free-running decode.
  GenerationResult generate(const text::MixedSequence& seq, std::size_t max_frames, Rng& rng,
                            bool stop_on_attention = true);
};

}  // namespace mixtts
