// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "mixtts/trainer.hpp"

namespace mixtts::trainer {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::size_t to_size(std::string_view v, const std::string& key) {
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" +
                      std::string(v) + "'");
  }
  return out;
}

double to_double(std::string_view v, const std::string& key) {
  std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + s + "'");
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Key {
  std::function<void(TrainConfig&, std::string_view, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <typename Field>
Key size_key(Field field) {
  return {[field](TrainConfig& c, std::string_view v, const std::string& k) {
            field(c) = to_size(v, k);
          },
          [field](const TrainConfig& c) { return std::to_string(field(const_cast<TrainConfig&>(c))); }};
}

template <typename Field>
Key double_key(Field field) {
  return {[field](TrainConfig& c, std::string_view v, const std::string& k) {
            field(c) = to_double(v, k);
          },
          [field](const TrainConfig& c) { return fmt(field(const_cast<TrainConfig&>(c))); }};
}

// Ordered so to_text groups keys the way the hyperparameter table does.
const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> table{
      {"vocab_size", size_key([](TrainConfig& c) -> std::size_t& { return c.model.vocab_size; })},
      {"embedding_dim",
       size_key([](TrainConfig& c) -> std::size_t& { return c.model.embedding_dim; })},
      {"smrc_stacks", size_key([](TrainConfig& c) -> std::size_t& { return c.model.smrc_stacks; })},
      {"smrc_channels",
       size_key([](TrainConfig& c) -> std::size_t& { return c.model.smrc_channels; })},
      {"encoder_hidden",
       size_key([](TrainConfig& c) -> std::size_t& { return c.model.encoder_hidden; })},
      {"prenet_layers",
       size_key([](TrainConfig& c) -> std::size_t& { return c.model.decoder.prenet_layers; })},
      {"prenet_hidden",
       size_key([](TrainConfig& c) -> std::size_t& { return c.model.decoder.prenet_hidden; })},
      {"prenet_keep_prob",
       double_key([](TrainConfig& c) -> double& { return c.model.decoder.prenet_keep_prob; })},
      {"attention_hidden",
       size_key([](TrainConfig& c) -> std::size_t& { return c.model.decoder.attention_hidden; })},
      {"num_mixes",
       size_key([](TrainConfig& c) -> std::size_t& { return c.model.decoder.mixtures; })},
      {"attention_step_bias",
       double_key([](TrainConfig& c) -> double& { return c.model.decoder.attention_step_bias; })},
      {"decoder_layers",
       size_key([](TrainConfig& c) -> std::size_t& { return c.model.decoder.decoder_layers; })},
      {"decoder_hidden",
       size_key([](TrainConfig& c) -> std::size_t& { return c.model.decoder.decoder_hidden; })},
      {"cell_keep_prob",
       double_key([](TrainConfig& c) -> double& { return c.model.decoder.cell_keep_prob; })},
      {"init_scale",
       double_key([](TrainConfig& c) -> double& { return c.model.decoder.lstm_init_scale; })},
      {"learning_rate", double_key([](TrainConfig& c) -> double& { return c.optim.learning_rate; })},
      {"adam_beta1", double_key([](TrainConfig& c) -> double& { return c.optim.beta1; })},
      {"adam_beta2", double_key([](TrainConfig& c) -> double& { return c.optim.beta2; })},
      {"adam_epsilon", double_key([](TrainConfig& c) -> double& { return c.optim.epsilon; })},
      {"clip_norm", double_key([](TrainConfig& c) -> double& { return c.optim.clip_norm; })},
      {"tbptt_length", size_key([](TrainConfig& c) -> std::size_t& { return c.tbptt_length; })},
      {"batch_size", size_key([](TrainConfig& c) -> std::size_t& { return c.batch_size; })},
      {"training_steps", size_key([](TrainConfig& c) -> std::size_t& { return c.training_steps; })},
      {"p_phone", double_key([](TrainConfig& c) -> double& { return c.p_phone; })},
      {"checkpoint_every",
       size_key([](TrainConfig& c) -> std::size_t& { return c.checkpoint_every; })},
      {"log_every", size_key([](TrainConfig& c) -> std::size_t& { return c.log_every; })},
      {"seed", {[](TrainConfig& c, std::string_view v, const std::string& k) {
                  c.seed = to_size(v, k);
                },
                [](const TrainConfig& c) { return std::to_string(c.seed); }}},
  };
  return table;
}

void validate(const TrainConfig& c) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("config: ") + what);
  };
  need(c.tbptt_length >= 1, "tbptt_length must be >= 1");
  need(c.batch_size >= 1, "batch_size must be >= 1");
  need(c.p_phone >= 0.0 && c.p_phone <= 1.0, "p_phone must lie in [0, 1]");
  need(c.model.decoder.prenet_keep_prob > 0.0 && c.model.decoder.prenet_keep_prob <= 1.0,
       "prenet_keep_prob must lie in (0, 1]");
  need(c.model.decoder.cell_keep_prob > 0.0 && c.model.decoder.cell_keep_prob <= 1.0,
       "cell_keep_prob must lie in (0, 1]");
  need(c.model.decoder.mixtures >= 1, "num_mixes must be >= 1");
  need(c.model.decoder.decoder_layers >= 1, "decoder_layers must be >= 1");
  need(c.model.embedding_dim >= 1 && c.model.vocab_size >= 1, "embedding sizes must be >= 1");
  need(c.optim.learning_rate > 0.0 && c.optim.clip_norm > 0.0,
       "learning_rate and clip_norm must be positive");
  need(c.checkpoint_every >= 1 && c.log_every >= 1, "checkpoint_every and log_every must be >= 1");
}

}  // namespace

TrainConfig TrainConfig::preset_named(std::string_view name) {
  TrainConfig c;
  c.preset = std::string(name);
  if (name == "full") return c;
  if (name == "desk") {
    c.model = ModelConfig::desk();
    c.batch_size = 8;
    c.tbptt_length = 64;
    c.training_steps = 20000;
    c.checkpoint_every = 500;
    return c;
  }
  if (name == "toy") {
    c.model = ModelConfig::toy();
    c.batch_size = 1;
    c.tbptt_length = 256;
    c.training_steps = 1500;
    c.checkpoint_every = 500;
    c.optim.learning_rate = 1e-3;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected full, desk or toy)");
}

TrainConfig parse_config(std::string_view text) {
  std::vector<std::tuple<std::size_t, std::string, std::string>> entries;
  std::string preset = "full";
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(v.substr(0, eq)));
    std::string value(trim(v.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    }
    if (!seen.insert(key).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    if (key == "preset") {
      preset = value;
    } else {
      entries.emplace_back(line_no, std::move(key), std::move(value));
    }
  }
  TrainConfig c = TrainConfig::preset_named(preset);
  for (const auto& [no, key, value] : entries) {
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&key](const auto& kv) { return kv.first == key; });
    if (it == table.end()) {
      throw ConfigError("config line " + std::to_string(no) + ": unknown key '" + key + "'");
    }
    it->second.set(c, value, key);
  }
  validate(c);
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile(path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const TrainConfig& config) {
  std::string out = "preset = " + config.preset + "\n";
  for (const auto& [key, k] : keys()) out += key + " = " + k.get(config) + "\n";
  return out;
}

}  // namespace mixtts::trainer
