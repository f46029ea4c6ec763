// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include "mixtts/encoder.hpp"

#include "mixtts/nn/ops.hpp"

namespace mixtts {

EncoderParams EncoderParams::init(std::size_t embedding_dim, std::size_t stacks,
                                  std::size_t branch_channels, std::vector<std::size_t> kernels,
                                  std::size_t hidden, double lstm_init_scale, Rng& rng) {
  EncoderParams p;
  p.kernels = std::move(kernels);
  const std::size_t channels = p.kernels.size() * branch_channels;
  p.input_projection = nn::LinearParams::orthonormal_init(embedding_dim, channels, rng);
  for (std::size_t s = 0; s < stacks; ++s) {
    SmrcStack stack;
    for (std::size_t k : p.kernels) {
      auto branch = nn::LinearParams::orthonormal_init(k * channels, branch_channels, rng);
      stack.branch_weights.push_back(branch.weight);
      stack.branch_biases.push_back(branch.bias);
    }
    stack.gamma = nn::Tensor::parameter({1, channels}, std::vector<double>(channels, 1.0));
    stack.beta = nn::Tensor::parameter({1, channels}, std::vector<double>(channels, 0.0));
    stack.stats = nn::RunningStats::identity(channels);
    p.stacks.push_back(std::move(stack));
  }
  p.forward = nn::lstm_init(channels, hidden, lstm_init_scale, rng);
  p.backward = nn::lstm_init(channels, hidden, lstm_init_scale, rng);
  return p;
}

void EncoderParams::register_tensors(nn::NamedTensors& out, const std::string& prefix) const {
  nn::register_linear(out, prefix + "/input_projection", input_projection);
  for (std::size_t s = 0; s < stacks.size(); ++s) {
    const std::string sp = prefix + "/smrc" + std::to_string(s);
    for (std::size_t b = 0; b < kernels.size(); ++b) {
      const std::string bp = sp + "/conv" + std::to_string(kernels[b]);
      out.emplace(bp + "/weight", stacks[s].branch_weights[b]);
      out.emplace(bp + "/bias", stacks[s].branch_biases[b]);
    }
    out.emplace(sp + "/bn/gamma", stacks[s].gamma);
    out.emplace(sp + "/bn/beta", stacks[s].beta);
    out.emplace(sp + "/bn/running_mean", stacks[s].stats.mean);
    out.emplace(sp + "/bn/running_var", stacks[s].stats.var);
  }
  nn::register_lstm(out, prefix + "/bilstm/forward", forward);
  nn::register_lstm(out, prefix + "/bilstm/backward", backward);
}

nn::Tensor smrc_stack_forward(const nn::Tensor& x, SmrcStack& stack,
                              const std::vector<std::size_t>& kernels, nn::Mode mode) {
  std::vector<nn::Tensor> branches;
  branches.reserve(kernels.size());
  for (std::size_t b = 0; b < kernels.size(); ++b) {
    branches.push_back(nn::conv1d(x, stack.branch_weights[b], stack.branch_biases[b], kernels[b]));
  }
  const nn::Tensor normalized =
      nn::batch_norm(nn::concat_cols(branches), stack.gamma, stack.beta, stack.stats, mode);
  return nn::add(x, nn::relu(normalized));
}

nn::Tensor smrc_forward(const EmbeddedSequence& e_f, EncoderParams& params, nn::Mode mode) {
  if (e_f.vectors.cols() != params.input_projection.weight.rows()) {
    throw ShapeMismatch("smrc_forward: embedding dim " + std::to_string(e_f.vectors.cols()));
  }
  nn::Tensor x = params.input_projection(e_f.vectors);
  for (auto& stack : params.stacks) x = smrc_stack_forward(x, stack, params.kernels, mode);
  return x;
}

namespace {

nn::Tensor run_direction(const nn::Tensor& x, const nn::LstmParams& params) {
  Rng unused(0);
  auto state = nn::LstmCellState::zeros(1, params.hidden());
  std::vector<nn::Tensor> outputs;
  outputs.reserve(x.rows());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    auto [h, next] = nn::lstm_step(nn::slice_rows(x, t, 1), state, params, 1.0, unused, false);
    outputs.push_back(h);
    state = std::move(next);
  }
  return nn::concat_rows(outputs);
}

}  // namespace

nn::Tensor bidirectional_lstm(const nn::Tensor& x, const nn::LstmParams& forward,
                              const nn::LstmParams& backward) {
  const nn::Tensor fwd = run_direction(x, forward);
  const nn::Tensor bwd = nn::reverse_rows(run_direction(nn::reverse_rows(x), backward));
  return nn::concat_cols({fwd, bwd});
}

EncoderOutput encode(const EmbeddedSequence& e_f, EncoderParams& params, nn::Mode mode) {
  const nn::Tensor conv = smrc_forward(e_f, params, mode);
  return {bidirectional_lstm(conv, params.forward, params.backward)};
}

}  // namespace mixtts
