// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include "mixtts/model.hpp"

#include <algorithm>

namespace mixtts {

ModelConfig ModelConfig::full() { return ModelConfig{}; }

ModelConfig ModelConfig::desk() {
  ModelConfig c;
  c.smrc_channels = 32;
  c.encoder_hidden = 32;
  c.decoder.prenet_hidden = 32;
  c.decoder.attention_hidden = 128;
  c.decoder.decoder_hidden = 128;
  return c;
}

ModelConfig ModelConfig::toy() {
  ModelConfig c = desk();
  c.decoder.attention_hidden = 64;
  c.decoder.decoder_hidden = 64;
  return c;
}

Model Model::init(const ModelConfig& config, Rng& rng) {
  Model m;
  m.config = config;
  m.embedding = EmbeddingTables::init(config.vocab_size, config.embedding_dim, rng);
  m.encoder = EncoderParams::init(config.embedding_dim, config.smrc_stacks, config.smrc_channels,
                                  config.smrc_kernels, config.encoder_hidden,
                                  config.decoder.lstm_init_scale, rng);
  m.decoder = DecoderParams::init(config.decoder, m.encoder.memory_dim(), rng);
  return m;
}

nn::NamedTensors Model::named_tensors() const {
  nn::NamedTensors out;
  out.emplace("embedding/char", embedding.char_table);
  out.emplace("embedding/phone", embedding.phone_table);
  out.emplace("embedding/mask", embedding.mask_table);
  encoder.register_tensors(out, "encoder");
  decoder.register_tensors(out, "decoder");
  return out;
}

std::vector<std::pair<std::string, nn::Tensor>> Model::parameters() const {
  std::vector<std::pair<std::string, nn::Tensor>> out;
  for (const auto& [name, t] : named_tensors()) {
    if (t.requires_grad()) out.emplace_back(name, t);
  }
  return out;
}

void Model::load_values(const std::map<std::string, Matrix>& values) {
  for (auto& [name, t] : named_tensors()) {
    const auto it = values.find(name);
    if (it == values.end()) throw ShapeMismatch("checkpoint lacks tensor " + name);
    if (it->second.rows() != t.rows() || it->second.cols() != t.cols()) {
      throw ShapeMismatch("checkpoint tensor " + name + " has the wrong shape");
    }
    nn::Tensor handle = t;
    std::copy(it->second.data().begin(), it->second.data().end(), handle.mutable_value().begin());
  }
}

EncoderOutput Model::encode(const text::MixedSequence& seq, nn::Mode mode) {
  return mixtts::encode(embed_mixed(seq, embedding), encoder, mode);
}

GenerationResult Model::generate(const text::MixedSequence& seq, std::size_t max_frames,
                                 Rng& rng, bool stop_on_attention) {
  const EncoderOutput enc = encode(seq, nn::Mode::kEval);
  return generate_frames(enc.memory, decoder, max_frames, rng, stop_on_attention);
}

}  // namespace mixtts
