// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <cmath>
#include <sstream>

#include "mixtts/nn/ops.hpp"
#include "mixtts/trainer.hpp"

namespace mixtts::trainer {

double global_grad_norm(const ParamList& params) {
  double acc = 0.0;
  for (const auto& [name, t] : params) {
    for (double g : t.grad()) acc += g * g;
  }
  return std::sqrt(acc);
}

UpdateStats apply_update(const ParamList& params, AdamState& state, const OptimConfig& config) {
  UpdateStats stats;
  stats.grad_norm = global_grad_norm(params);
  if (!std::isfinite(stats.grad_norm)) throw NonFiniteGradient("gradient norm is not finite");
  if (stats.grad_norm > config.clip_norm) stats.scale = config.clip_norm / stats.grad_norm;
  ++state.t;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  for (const auto& [name, tensor] : params) {
    nn::Tensor t = tensor;
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.size() != t.size()) m.assign(t.size(), 0.0);
    if (v.size() != t.size()) v.assign(t.size(), 0.0);
    const auto g = t.grad();
    auto p = t.mutable_value();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i] * stats.scale;
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * gi;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * gi * gi;
      p[i] -= config.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + config.epsilon);
    }
  }
  return stats;
}

StepStats train_step(const PackedBatchWindow& window, CarriedState& carried, Model& model,
                     AdamState& opt, const OptimConfig& config, Rng& rng) {
  const std::size_t batch = window.frames.batch;
  for (std::size_t b = 0; b < batch; ++b) {
    if (window.lane_lengths[b] == 0 || !window.linguistic_refs[b]) {
      throw DataError("train_step: every lane needs an utterance (use a cycling packer)");
    }
  }
  if (!carried.decoder || carried.decoder->batch() != batch) {
    carried.decoder = DecoderState::initial(model.decoder, batch);
    carried.memories.assign(batch, nn::Tensor());
  }
  const DecoderState start = carried.decoder->reset_lanes(window.reset_flags, model.decoder);
  std::vector<nn::Tensor> memories(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    if (window.reset_flags[b] || !carried.memories[b].defined()) {
      memories[b] = model.encode(*window.linguistic_refs[b], nn::Mode::kTrain).memory;
    } else {
      memories[b] = carried.memories[b];
    }
  }

  const ParamList params = model.parameters();
  for (const auto& [name, t] : params) {
    nn::Tensor handle = t;
    handle.zero_grad();
  }
  TeacherForcedResult result =
      teacher_forced_loss(window.frames, start, memories, model.decoder, rng, nn::Mode::kTrain);
  const double loss = result.loss.item();
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "non-finite loss in window of " << window.steps() << " steps; lanes:";
    for (std::size_t b = 0; b < batch; ++b) {
      msg << " [utt " << window.utterances[b] << " offset " << window.lane_offsets[b]
          << (window.reset_flags[b] ? " reset" : "") << "]";
    }
    throw NonFiniteLoss(msg.str());
  }
  nn::backward(result.loss);
  const UpdateStats update = apply_update(params, opt, config);

  carried.decoder = result.final_state.detached();
  for (std::size_t b = 0; b < batch; ++b) carried.memories[b] = memories[b].detach();
  return {loss, update.grad_norm, window.steps()};
}

}  // namespace mixtts::trainer
