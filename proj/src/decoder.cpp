// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include "mixtts/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "mixtts/nn/ops.hpp"

namespace mixtts {

DecoderParams DecoderParams::init(const DecoderConfig& config, std::size_t memory_dim, Rng& rng) {
  DecoderParams p;
  p.config = config;
  std::size_t in = config.n_mels;
  for (std::size_t l = 0; l < config.prenet_layers; ++l) {
    p.prenet.push_back(nn::LinearParams::orthonormal_init(in, config.prenet_hidden, rng));
    in = config.prenet_hidden;
  }
  const std::size_t prenet_out = config.prenet_layers ? config.prenet_hidden : config.n_mels;
  p.attention_lstm = nn::lstm_init(prenet_out + memory_dim, config.attention_hidden,
                                   config.lstm_init_scale, rng);
  p.attention_head = nn::LinearParams::truncated_normal_init(
      config.attention_hidden, 3 * config.mixtures, config.lstm_init_scale, rng);
  {
    auto bias = p.attention_head.bias.mutable_value();
    for (std::size_t k = 2 * config.mixtures; k < 3 * config.mixtures; ++k) {
      bias[k] = config.attention_step_bias;
    }
  }
  std::size_t prev_hidden = 0;
  for (std::size_t l = 0; l < config.decoder_layers; ++l) {
    p.layers.push_back(nn::lstm_init(prenet_out + memory_dim + prev_hidden, config.decoder_hidden,
                                     config.lstm_init_scale, rng));
    prev_hidden = config.decoder_hidden;
  }
  p.projection = nn::LinearParams::truncated_normal_init(config.decoder_hidden, config.n_mels,
                                                         config.lstm_init_scale, rng);
  return p;
}

std::size_t DecoderParams::memory_dim() const {
  const std::size_t prenet_out = config.prenet_layers ? config.prenet_hidden : config.n_mels;
  return attention_lstm.input() - prenet_out;
}

void DecoderParams::register_tensors(nn::NamedTensors& out, const std::string& prefix) const {
  for (std::size_t l = 0; l < prenet.size(); ++l) {
    nn::register_linear(out, prefix + "/prenet" + std::to_string(l), prenet[l]);
  }
  nn::register_lstm(out, prefix + "/attention/lstm", attention_lstm);
  nn::register_linear(out, prefix + "/attention/head", attention_head);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    nn::register_lstm(out, prefix + "/lstm" + std::to_string(l), layers[l]);
  }
  nn::register_linear(out, prefix + "/projection", projection);
}

DecoderState DecoderState::initial(const DecoderParams& params, std::size_t batch) {
  const auto& cfg = params.config;
  DecoderState s;
  s.attention.kappa = nn::Tensor::zeros({batch, cfg.mixtures});
  s.attention.alpha =
      nn::Tensor::constant({batch, cfg.mixtures}, std::vector<double>(batch * cfg.mixtures, 1.0));
  s.attention.beta = s.attention.alpha.detach();
  s.attention.context = nn::Tensor::zeros({batch, params.memory_dim()});
  s.attention.lstm = nn::LstmCellState::zeros(batch, cfg.attention_hidden);
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    s.layers.push_back(nn::LstmCellState::zeros(batch, cfg.decoder_hidden));
  }
  s.prev_frame = nn::Tensor::zeros({batch, cfg.n_mels});
  return s;
}

DecoderState DecoderState::detached() const {
  DecoderState s;
  s.attention.kappa = attention.kappa.detach();
  s.attention.alpha = attention.alpha.detach();
  s.attention.beta = attention.beta.detach();
  s.attention.context = attention.context.detach();
  s.attention.lstm = {attention.lstm.h.detach(), attention.lstm.c.detach()};
  for (const auto& l : layers) s.layers.push_back({l.h.detach(), l.c.detach()});
  s.prev_frame = prev_frame.detach();
  return s;
}

namespace {

void copy_lane(nn::Tensor& dst, const nn::Tensor& src, std::size_t lane) {
  const std::size_t n = dst.cols();
  std::copy_n(src.value().begin() + static_cast<std::ptrdiff_t>(lane * n), n,
              dst.mutable_value().begin() + static_cast<std::ptrdiff_t>(lane * n));
}

template <typename Fn>
void for_each_state_tensor(DecoderState& s, Fn fn) {
  fn(s.attention.kappa);
  fn(s.attention.alpha);
  fn(s.attention.beta);
  fn(s.attention.context);
  fn(s.attention.lstm.h);
  fn(s.attention.lstm.c);
  for (auto& l : s.layers) {
    fn(l.h);
    fn(l.c);
  }
  fn(s.prev_frame);
}

}  // namespace

DecoderState DecoderState::reset_lanes(const std::vector<bool>& reset,
                                       const DecoderParams& params) const {
  DecoderState out = detached();
  const DecoderState fresh = initial(params, batch());
  std::vector<nn::Tensor> fresh_tensors;
  for_each_state_tensor(const_cast<DecoderState&>(fresh),
                        [&](nn::Tensor& t) { fresh_tensors.push_back(t); });
  std::size_t i = 0;
  for_each_state_tensor(out, [&](nn::Tensor& t) {
    for (std::size_t b = 0; b < reset.size(); ++b) {
      if (reset[b]) copy_lane(t, fresh_tensors[i], b);
    }
    ++i;
  });
  return out;
}

double DecoderState::lane_norm(std::size_t lane) const {
  double acc = 0.0;
  auto add_lane = [&](const nn::Tensor& t) {
    const std::size_t n = t.cols();
    for (std::size_t j = 0; j < n; ++j) {
      const double v = t.value()[lane * n + j];
      acc += v * v;
    }
  };
  add_lane(attention.kappa);
  add_lane(attention.context);
  add_lane(attention.lstm.h);
  add_lane(attention.lstm.c);
  for (const auto& l : layers) {
    add_lane(l.h);
    add_lane(l.c);
  }
  add_lane(prev_frame);
  return acc;
}

nn::Tensor gm_attention_weights(const nn::Tensor& alpha, const nn::Tensor& beta,
                                const nn::Tensor& kappa, std::span<const std::size_t> lengths) {
  const std::size_t batch = alpha.rows(), k_mix = alpha.cols();
  if (beta.shape() != alpha.shape() || kappa.shape() != alpha.shape() || lengths.size() != batch) {
    throw ShapeMismatch("gm_attention_weights: parameter shapes");
  }
  std::size_t t_max = 0;
  for (auto len : lengths) {
    if (len == 0) throw EmptyMemory();
    t_max = std::max(t_max, len);
  }
  std::vector<double> phi(batch * t_max, 0.0);
  const auto a = alpha.value(), b = beta.value(), k = kappa.value();
  for (std::size_t lane = 0; lane < batch; ++lane) {
    for (std::size_t u = 0; u < lengths[lane]; ++u) {
      double acc = 0.0;
      for (std::size_t m = 0; m < k_mix; ++m) {
        const double d = k[lane * k_mix + m] - static_cast<double>(u);
        acc += a[lane * k_mix + m] * std::exp(-b[lane * k_mix + m] * d * d);
      }
      phi[lane * t_max + u] = acc;
    }
  }
  std::vector<std::size_t> lens(lengths.begin(), lengths.end());
  return nn::Tensor::from_op(
      {batch, t_max}, std::move(phi), {alpha, beta, kappa},
      [batch, k_mix, t_max, lens = std::move(lens)](nn::detail::Node& self) {
        const double* a = self.parents[0]->value.data();
        const double* b = self.parents[1]->value.data();
        const double* k = self.parents[2]->value.data();
        double* ga = self.parents[0]->requires_grad ? self.parents[0]->grad.data() : nullptr;
        double* gb = self.parents[1]->requires_grad ? self.parents[1]->grad.data() : nullptr;
        double* gk = self.parents[2]->requires_grad ? self.parents[2]->grad.data() : nullptr;
        for (std::size_t lane = 0; lane < batch; ++lane) {
          for (std::size_t m = 0; m < k_mix; ++m) {
            const std::size_t i = lane * k_mix + m;
            double da = 0.0, db = 0.0, dk = 0.0;
            for (std::size_t u = 0; u < lens[lane]; ++u) {
              const double g = self.grad[lane * t_max + u];
              if (g == 0.0) continue;
              const double d = k[i] - static_cast<double>(u);
              const double e = std::exp(-b[i] * d * d);
              da += g * e;
              db -= g * a[i] * e * d * d;
              dk -= g * a[i] * e * 2.0 * b[i] * d;
            }
            if (ga) ga[i] += da;
            if (gb) gb[i] += db;
            if (gk) gk[i] += dk;
          }
        }
      });
}

nn::Tensor attend(const nn::Tensor& phi, std::span<const nn::Tensor> memories) {
  const std::size_t batch = phi.rows(), t_max = phi.cols();
  if (memories.size() != batch) throw ShapeMismatch("attend: one memory per lane");
  const std::size_t dim = memories.front().cols();
  std::vector<double> ctx(batch * dim, 0.0);
  std::vector<nn::Tensor> parents{phi};
  for (std::size_t lane = 0; lane < batch; ++lane) {
    const auto& mem = memories[lane];
    if (mem.cols() != dim || mem.rows() > t_max) throw ShapeMismatch("attend: memory shape");
    for (std::size_t u = 0; u < mem.rows(); ++u) {
      const double w = phi.value()[lane * t_max + u];
      if (w == 0.0) continue;
      const double* row = mem.value().data() + u * dim;
      for (std::size_t j = 0; j < dim; ++j) ctx[lane * dim + j] += w * row[j];
    }
    parents.push_back(mem);
  }
  return nn::Tensor::from_op(
      {batch, dim}, std::move(ctx), std::move(parents),
      [batch, t_max, dim](nn::detail::Node& self) {
        const double* phi = self.parents[0]->value.data();
        double* gphi = self.parents[0]->requires_grad ? self.parents[0]->grad.data() : nullptr;
        for (std::size_t lane = 0; lane < batch; ++lane) {
          auto& mem = *self.parents[lane + 1];
          const double* g = self.grad.data() + lane * dim;
          double* gmem = mem.requires_grad ? mem.grad.data() : nullptr;
          for (std::size_t u = 0; u < mem.rows(); ++u) {
            const double* row = mem.value.data() + u * dim;
            if (gphi) {
              double acc = 0.0;
              for (std::size_t j = 0; j < dim; ++j) acc += g[j] * row[j];
              gphi[lane * t_max + u] += acc;
            }
            if (gmem) {
              const double w = phi[lane * t_max + u];
              for (std::size_t j = 0; j < dim; ++j) gmem[u * dim + j] += w * g[j];
            }
          }
        }
      });
}

nn::Tensor prenet(const nn::Tensor& frame, const DecoderParams& params, Rng& rng) {
  nn::Tensor x = frame;
  for (const auto& layer : params.prenet) {
    x = nn::dropout(layer(x), params.config.prenet_keep_prob, rng, true);
  }
  return x;
}

AttentionStep gm_attention_step(const nn::Tensor& prenet_out, const AttentionState& state,
                                std::span<const nn::Tensor> memories,
                                const DecoderParams& params) {
  const std::size_t k_mix = params.config.mixtures;
  std::vector<std::size_t> lengths;
  for (const auto& m : memories) {
    if (m.rows() == 0) throw EmptyMemory();
    lengths.push_back(m.rows());
  }
  Rng unused(0);
  auto [h, lstm] = nn::lstm_step(nn::concat_cols({prenet_out, state.context}), state.lstm,
                                 params.attention_lstm, 1.0, unused, false);
  const nn::Tensor head = params.attention_head(h);
  AttentionState next;
  next.alpha = nn::exp(nn::slice_cols(head, 0, k_mix));
  next.beta = nn::exp(nn::slice_cols(head, k_mix, k_mix));
  next.kappa = nn::add(state.kappa, nn::softplus(nn::slice_cols(head, 2 * k_mix, k_mix)));
  next.lstm = lstm;
  const nn::Tensor phi = gm_attention_weights(next.alpha, next.beta, next.kappa, lengths);
  next.context = attend(phi, memories);
  return {next.context, phi, std::move(next)};
}

DecodeStep decode_step(const DecoderState& state, std::span<const nn::Tensor> memories,
                       const DecoderParams& params, Rng& rng, nn::Mode mode) {
  const bool train = mode == nn::Mode::kTrain;
  const nn::Tensor pre = prenet(state.prev_frame, params, rng);
  AttentionStep att = gm_attention_step(pre, state.attention, memories, params);
  DecoderState next;
  next.attention = std::move(att.state);
  nn::Tensor below;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const nn::Tensor input = l == 0 ? nn::concat_cols({pre, att.context})
                                    : nn::concat_cols({pre, att.context, below});
    auto [h, cell] = nn::lstm_step(input, state.layers[l], params.layers[l],
                                   params.config.cell_keep_prob, rng, train);
    next.layers.push_back(cell);
    below = h;
  }
  const nn::Tensor frame = params.projection(below);
  next.prev_frame = frame;
  return {frame, std::move(next)};
}

nn::Tensor FrameBatch::step(std::size_t s) const {
  std::vector<double> v(batch * dims);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>((b * steps + s) * dims), dims,
                v.begin() + static_cast<std::ptrdiff_t>(b * dims));
  }
  return nn::Tensor::constant({batch, dims}, std::move(v));
}

TeacherForcedResult teacher_forced_loss(const FrameBatch& frames, const DecoderState& state,
                                        std::span<const nn::Tensor> memories,
                                        const DecoderParams& params, Rng& rng, nn::Mode mode) {
  if (frames.batch != state.batch() || frames.dims != params.config.n_mels ||
      memories.size() != frames.batch || frames.steps == 0) {
    throw ShapeMismatch("teacher_forced_loss: batch layout");
  }
  DecoderState current = state;
  std::vector<nn::Tensor> step_losses;
  step_losses.reserve(frames.steps);
  for (std::size_t s = 0; s < frames.steps; ++s) {
    if (s > 0) current.prev_frame = frames.step(s - 1);
    DecodeStep out = decode_step(current, memories, params, rng, mode);
    step_losses.push_back(nn::mse(out.frame, frames.step(s)));
    current = std::move(out.state);
  }
  current.prev_frame = frames.step(frames.steps - 1);
  nn::Tensor total = step_losses.size() == 1 ? step_losses.front()
                                             : nn::sum(nn::concat_cols(step_losses));
  return {nn::scale(total, step_losses.size() == 1 ? 1.0 : 1.0 / static_cast<double>(frames.steps)),
          std::move(current)};
}

GenerationResult generate_frames(const nn::Tensor& memory, const DecoderParams& params,
                                 std::size_t max_frames, Rng& rng, bool stop_on_attention) {
  if (memory.rows() == 0) throw EmptyMemory();
  const nn::Tensor mem = memory.detach();
  const std::span<const nn::Tensor> memories(&mem, 1);
  const std::size_t n_mels = params.config.n_mels;
  const std::size_t k_mix = params.config.mixtures;
  const double stop_at = static_cast<double>(memory.rows()) - 1.0 + kStopMargin;

  GenerationResult result;
  std::vector<double> frames;
  DecoderState state = DecoderState::initial(params, 1);
  std::size_t past_end = 0;
  for (std::size_t step = 0; step < max_frames; ++step) {
    DecodeStep out = decode_step(state, memories, params, rng, nn::Mode::kEval);
    for (double v : out.frame.value()) {
      if (!std::isfinite(v)) throw NonFiniteFrame("non-finite frame at step " + std::to_string(step));
    }
    frames.insert(frames.end(), out.frame.value().begin(), out.frame.value().end());
    const auto kappa = out.state.attention.kappa.value();
    const auto alpha = out.state.attention.alpha.value();
    result.kappa.emplace_back(kappa.begin(), kappa.end());
    double weight = 0.0, position = 0.0;
    for (std::size_t m = 0; m < k_mix; ++m) {
      weight += alpha[m];
      position += alpha[m] * kappa[m];
    }
    position /= weight;
    past_end = position > stop_at ? past_end + 1 : 0;
    state = out.state.detached();
    if (stop_on_attention && past_end >= kStopPatience) {
      result.stopped_by_attention = true;
      break;
    }
  }
  const std::size_t rows = frames.size() / n_mels;
  result.frames = Matrix(rows, n_mels, std::move(frames));
  return result;
}

}  // namespace mixtts
