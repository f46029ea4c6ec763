// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <chrono>
#include <cstdio>

#include <json.hpp>

#include "mixtts/trainer.hpp"

namespace mixtts::trainer {

namespace {

Matrix to_matrix(const nn::Tensor& t) {
  return Matrix(t.rows(), t.cols(), std::vector<double>(t.value().begin(), t.value().end()));
}

nn::Tensor to_tensor(const Matrix& m) { return nn::Tensor::constant({m.rows(), m.cols()}, m.data()); }

Matrix row_matrix(const std::vector<double>& v) { return Matrix(1, v.size(), v); }

std::vector<std::pair<std::string, nn::Tensor*>> state_slots(DecoderState& s) {
  std::vector<std::pair<std::string, nn::Tensor*>> out{
      {"kappa", &s.attention.kappa},        {"alpha", &s.attention.alpha},
      {"beta", &s.attention.beta},          {"context", &s.attention.context},
      {"attention_h", &s.attention.lstm.h}, {"attention_c", &s.attention.lstm.c},
      {"prev_frame", &s.prev_frame}};
  for (std::size_t l = 0; l < s.layers.size(); ++l) {
    out.emplace_back("layer" + std::to_string(l) + "_h", &s.layers[l].h);
    out.emplace_back("layer" + std::to_string(l) + "_c", &s.layers[l].c);
  }
  return out;
}

std::string lane_key(std::size_t b) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "carry/memory/%04zu", b);
  return buf;
}

const std::string& require(const Checkpoint& c, const std::string& key) {
  const auto it = c.strings.find(key);
  if (it == c.strings.end()) throw DataError("checkpoint lacks '" + key + "'");
  return it->second;
}

const Matrix& require_tensor(const Checkpoint& c, const std::string& key) {
  const auto it = c.tensors.find(key);
  if (it == c.tensors.end()) throw DataError("checkpoint lacks tensor '" + key + "'");
  return it->second;
}

std::map<std::string, Matrix> model_values(const Checkpoint& c) {
  std::map<std::string, Matrix> out;
  for (const auto& [name, m] : c.tensors) {
    if (name.rfind("model/", 0) == 0) out.emplace(name.substr(6), m);
  }
  return out;
}

}  // namespace

Trainer::Trainer(TrainConfig config, std::shared_ptr<const TrainingCorpus> corpus)
    : config_(std::move(config)), corpus_(std::move(corpus)), dropout_rng_(config_.seed + 2) {
  if (!corpus_ || corpus_->utterances.empty()) throw EmptyCorpus();
  Rng init_rng(config_.seed);
  model_ = Model::init(config_.model, init_rng);
  std::vector<const Matrix*> frames;
  for (const auto& u : corpus_->utterances) {
    if (u.frames.cols() != config_.model.decoder.n_mels) {
      throw DataError("utterance " + u.record.id + " has the wrong feature width");
    }
    frames.push_back(&u.frames);
  }
  packer_ = std::make_unique<MinibatchPacker>(
      std::move(frames), config_.batch_size, config_.tbptt_length,
      [this](std::size_t u, Rng& rng) {
        auto seq = text::mix_words(corpus_->utterances[u].record, corpus_->lexicon,
                                   config_.p_phone, rng);
        if (observer_) observer_(u, seq);
        return seq;
      },
      MinibatchPacker::Mode::kCycle, config_.seed + 1);
}

StepStats Trainer::step() {
  const auto window = packer_->next();
  if (!window) throw EmptyCorpus();
  StepStats stats = train_step(*window, carried_, model_, adam_, config_.optim, dropout_rng_);
  ++step_;
  return stats;
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint c;
  for (const auto& [name, t] : model_.named_tensors()) c.tensors.emplace("model/" + name, to_matrix(t));
  for (const auto& [name, t] : model_.parameters()) {
    const auto m = adam_.m.find(name);
    const auto v = adam_.v.find(name);
    if (m == adam_.m.end() || v == adam_.v.end()) continue;
    c.tensors.emplace("adam/m/" + name, Matrix(t.rows(), t.cols(), m->second));
    c.tensors.emplace("adam/v/" + name, Matrix(t.rows(), t.cols(), v->second));
  }
  c.tensors.emplace("norm/mean", row_matrix(corpus_->stats.mean));
  c.tensors.emplace("norm/std", row_matrix(corpus_->stats.std));
  if (carried_.decoder) {
    DecoderState s = *carried_.decoder;
    for (const auto& [name, t] : state_slots(s)) c.tensors.emplace("carry/state/" + name, to_matrix(*t));
    for (std::size_t b = 0; b < carried_.memories.size(); ++b) {
      if (carried_.memories[b].defined()) c.tensors.emplace(lane_key(b), to_matrix(carried_.memories[b]));
    }
  }
  c.strings["config"] = to_text(config_);
  c.strings["lexicon"] = corpus_->lexicon_text;
  c.strings["step"] = std::to_string(step_);
  c.strings["adam/t"] = std::to_string(adam_.t);
  c.strings["rng/dropout"] = dropout_rng_.serialize();
  c.strings["packer"] = packer_->serialize();
  return c;
}

std::unique_ptr<Trainer> Trainer::resume(const Checkpoint& ckpt,
                                         std::shared_ptr<const TrainingCorpus> corpus) {
  auto t = std::make_unique<Trainer>(parse_config(require(ckpt, "config")), std::move(corpus));
  t->model_.load_values(model_values(ckpt));
  for (const auto& [name, p] : t->model_.parameters()) {
    const auto m = ckpt.tensors.find("adam/m/" + name);
    const auto v = ckpt.tensors.find("adam/v/" + name);
    if (m != ckpt.tensors.end() && v != ckpt.tensors.end()) {
      t->adam_.m[name] = m->second.data();
      t->adam_.v[name] = v->second.data();
    }
  }
  t->adam_.t = std::stoull(require(ckpt, "adam/t"));
  t->step_ = std::stoull(require(ckpt, "step"));
  t->dropout_rng_ = Rng::deserialize(require(ckpt, "rng/dropout"));
  t->packer_->restore(require(ckpt, "packer"));
  if (ckpt.tensors.contains("carry/state/kappa")) {
    DecoderState s = DecoderState::initial(t->model_.decoder, t->config_.batch_size);
    for (const auto& [name, slot] : state_slots(s)) {
      *slot = to_tensor(require_tensor(ckpt, "carry/state/" + name));
    }
    t->carried_.decoder = s;
    t->carried_.memories.assign(t->config_.batch_size, nn::Tensor());
    for (std::size_t b = 0; b < t->config_.batch_size; ++b) {
      const auto it = ckpt.tensors.find(lane_key(b));
      if (it != ckpt.tensors.end()) t->carried_.memories[b] = to_tensor(it->second);
    }
  }
  return t;
}

LoadedModel load_model(const Checkpoint& ckpt) {
  LoadedModel out;
  out.config = parse_config(require(ckpt, "config"));
  Rng rng(0);
  out.model = Model::init(out.config.model, rng);
  out.model.load_values(model_values(ckpt));
  const Matrix& mean = require_tensor(ckpt, "norm/mean");
  const Matrix& sd = require_tensor(ckpt, "norm/std");
  out.stats.mean = mean.data();
  out.stats.std = sd.data();
  out.lexicon_text = require(ckpt, "lexicon");
  return out;
}

std::vector<double> train_loop(Trainer& trainer, const LoopOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto& config = trainer.config();
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);
  std::vector<double> losses;
  while (trainer.steps_done() < config.training_steps) {
    const StepStats stats = trainer.step();
    losses.push_back(stats.loss);
    const std::size_t step = trainer.steps_done();
    if (options.log && step % config.log_every == 0) {
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      nlohmann::json line{{"step", step},
                          {"loss", stats.loss},
                          {"grad_norm", stats.grad_norm},
                          {"wall_time", wall}};
      *options.log << line.dump() << '\n' << std::flush;
    }
    if (!options.out_dir.empty() && step % config.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "ckpt-%08zu.bin", step);
      trainer.checkpoint().save(options.out_dir / name);
    }
  }
  if (!options.out_dir.empty()) trainer.checkpoint().save(options.out_dir / "latest.bin");
  return losses;
}

}  // namespace mixtts::trainer
