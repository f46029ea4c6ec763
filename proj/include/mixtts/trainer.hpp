// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
//
// Truncated-BPTT training: continuous per-lane packing of utterances into
// fixed-length windows, Adam with global-norm clipping, and bit-exact
// checkpoints that capture everything needed to resume.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mixtts/dsp.hpp"
#include "mixtts/model.hpp"
#include "mixtts/textfrontend.hpp"

namespace mixtts::trainer {

// Configuration ------------------------------------------------------------

struct OptimConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 10.0;
};

struct TrainConfig {
  std::string preset = "full";
  ModelConfig model;
  OptimConfig optim;
  std::size_t tbptt_length = 256;
  std::size_t batch_size = 64;
  std::size_t training_steps = 500000;
  double p_phone = 0.5;
  std::size_t checkpoint_every = 1000;
  std::size_t log_every = 1;
  std::uint64_t seed = 0;

  static TrainConfig preset_named(std::string_view name);
};

/// Flat `key = value` lines; `#` starts a comment. A `preset` key (full,
/// desk or toy) is applied before every other key regardless of position.
/// Unknown keys, duplicate keys and unparsable values throw ConfigError.
TrainConfig parse_config(std::string_view text);
TrainConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const TrainConfig& config);

// Data ---------------------------------------------------------------------

struct TrainingUtterance {
  text::UtteranceRecord record;
  Matrix frames;  // normalized log-mel [N x 80]
};

struct TrainingCorpus {
  std::vector<TrainingUtterance> utterances;
  text::Lexicon lexicon;
  std::string lexicon_text;
  dsp::NormStats stats;
};

struct PrepareOptions {
  /// Trailing fraction of the manifest held out from training and from the
  /// normalization statistics.
  double valid_fraction = 0.05;
};

/// Reads `manifest` (with audio at <manifest dir>/wavs/<id>.wav) and
/// `lexicon`, writes records.tsv, mels/<id>.mel (raw log-mel), stats.txt and
/// lexicon.txt under `out_dir`. Output bytes depend only on the inputs.
void prepare_dataset(const std::filesystem::path& manifest, const std::filesystem::path& lexicon,
                     const std::filesystem::path& out_dir, const PrepareOptions& options = {});

/// Loads a prepared directory; frames come back normalized.
TrainingCorpus load_prepared(const std::filesystem::path& dir, std::string_view split = "train");

/// Builds a corpus in memory from waveforms; statistics come from the audio.
TrainingCorpus make_corpus(const std::vector<text::ManifestEntry>& manifest,
                           const std::vector<dsp::Waveform>& audio, const std::string& lexicon_text);

std::string format_stats(const dsp::NormStats& stats);
dsp::NormStats parse_stats(std::string_view text);

// Packing ------------------------------------------------------------------

struct PackedBatchWindow {
  FrameBatch frames;  // [B x S x 80], zero past lane_lengths[b]
  std::vector<bool> reset_flags;
  std::vector<std::shared_ptr<const text::MixedSequence>> linguistic_refs;
  std::vector<std::size_t> lane_offsets;
  std::vector<std::size_t> lane_lengths;  // valid frames; 0 for an exhausted lane
  std::vector<std::size_t> utterances;    // corpus index, npos for an exhausted lane

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t steps() const { return frames.steps; }
};

/// B lanes each consume utterances from a shuffled queue. Every window
/// advances all active lanes by the same number of frames: the smallest of
/// S and each lane's remaining frames, so an utterance never shares a window
/// with the next one in its lane. A lane that finishes an utterance pulls the
/// next one (re-mixing its linguistic sequence) and raises its reset flag in
/// the following window.
class MinibatchPacker {
 public:
  using Mixer = std::function<text::MixedSequence(std::size_t utterance, Rng& rng)>;
  enum class Mode { kCycle, kSinglePass };

  /// `frames` must outlive the packer. Throws EmptyCorpus.
  MinibatchPacker(std::vector<const Matrix*> frames, std::size_t batch, std::size_t tbptt,
                  Mixer mixer, Mode mode, std::uint64_t seed);

  /// nullopt once every lane is exhausted (single-pass mode only).
  std::optional<PackedBatchWindow> next();

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return lanes_.size(); }

  /// Queue, lane positions, current mixed sequences and RNG state.
  std::string serialize() const;
  void restore(const std::string& state);

 private:
  struct Lane {
    std::size_t utterance = PackedBatchWindow::npos;
    std::size_t offset = 0;
    std::shared_ptr<const text::MixedSequence> sequence;
  };

  void refill_queue();
  void pull(Lane& lane);

  std::vector<const Matrix*> frames_;
  std::size_t tbptt_;
  Mixer mixer_;
  Mode mode_;
  Rng rng_;
  std::vector<std::size_t> queue_;
  std::size_t queue_pos_ = 0;
  std::size_t epoch_ = 0;
  std::vector<Lane> lanes_;
};

std::string serialize_sequence(const text::MixedSequence& seq);
text::MixedSequence parse_sequence(std::string_view text);

// Optimization -------------------------------------------------------------

struct AdamState {
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
  std::uint64_t t = 0;
};

using ParamList = std::vector<std::pair<std::string, nn::Tensor>>;

double global_grad_norm(const ParamList& params);

struct UpdateStats {
  double grad_norm = 0.0;  // before clipping
  double scale = 1.0;      // clip factor applied to every gradient
};

/// Scales gradients by min(1, clip / norm), then one Adam step. Throws
/// NonFiniteGradient.
UpdateStats apply_update(const ParamList& params, AdamState& state, const OptimConfig& config);

/// Decoder state and per-lane encoder memories carried between windows.
/// Memories are detached: the encoder only receives gradients in the window
/// where its utterance starts.
struct CarriedState {
  std::optional<DecoderState> decoder;
  std::vector<nn::Tensor> memories;
};

struct StepStats {
  double loss = 0.0;
  double grad_norm = 0.0;
  std::size_t window_steps = 0;
};

/// Resets flagged lanes, encodes their new utterances, runs the
/// teacher-forced loss over the window, backpropagates, clips and applies
/// Adam. Throws NonFiniteLoss with a diagnostic message.
StepStats train_step(const PackedBatchWindow& window, CarriedState& carried, Model& model,
                     AdamState& opt, const OptimConfig& config, Rng& rng);

// Checkpoints --------------------------------------------------------------

inline constexpr std::string_view kCheckpointMagic = "MIXTTS01";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::map<std::string, Matrix> tensors;
  std::map<std::string, std::string> strings;

  std::string to_bytes() const;
  static Checkpoint from_bytes(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

/// Inference view of a checkpoint: model, normalization statistics and the
/// lexicon it was trained with.
struct LoadedModel {
  TrainConfig config;
  Model model;
  dsp::NormStats stats;
  std::string lexicon_text;
};
LoadedModel load_model(const Checkpoint& ckpt);

// Training -----------------------------------------------------------------

class Trainer {
 public:
  Trainer(TrainConfig config, std::shared_ptr<const TrainingCorpus> corpus);
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  /// Pulls the next window and applies one update.
  StepStats step();

  std::size_t steps_done() const noexcept { return step_; }
  Model& model() noexcept { return model_; }
  const TrainConfig& config() const noexcept { return config_; }
  /// Moves the stopping point; nothing else in the config may change mid-run.
  void set_training_steps(std::size_t steps) noexcept { config_.training_steps = steps; }
  const CarriedState& carried() const noexcept { return carried_; }

  /// Called with (utterance index, sequence) each time an utterance is mixed.
  void set_mix_observer(std::function<void(std::size_t, const text::MixedSequence&)> fn) {
    observer_ = std::move(fn);
  }

  Checkpoint checkpoint() const;
  /// Restores parameters, optimizer, packer, carried state and RNG streams.
  static std::unique_ptr<Trainer> resume(const Checkpoint& ckpt,
                                         std::shared_ptr<const TrainingCorpus> corpus);

 private:
  TrainConfig config_;
  std::shared_ptr<const TrainingCorpus> corpus_;
  Model model_;
  AdamState adam_;
  std::unique_ptr<MinibatchPacker> packer_;
  CarriedState carried_;
  Rng dropout_rng_;
  std::size_t step_ = 0;
  std::function<void(std::size_t, const text::MixedSequence&)> observer_;
};

struct LoopOptions {
  std::filesystem::path out_dir;
  /// One JSON object per logged step: step, loss, grad_norm, wall_time.
  std::ostream* log = nullptr;
};

/// Runs until config.training_steps, writing ckpt-<step>.bin every
/// checkpoint_every steps and latest.bin at the end. Returns the losses.
std::vector<double> train_loop(Trainer& trainer, const LoopOptions& options);

}  // namespace mixtts::trainer
