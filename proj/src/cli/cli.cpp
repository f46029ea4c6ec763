// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include "mixtts/cli.hpp"

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixtts/dsp.hpp"
#include "mixtts/inversion.hpp"
#include "mixtts/trainer.hpp"

namespace mixtts::cli {

namespace {

using nlohmann::json;

struct PrepareArgs {
  std::string manifest, lexicon, out;
  double valid_fraction = 0.05;
};

struct TrainArgs {
  std::string config, data, out, resume;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
};

struct SynthArgs {
  std::string ckpt, text, mode = "pwcb", out, lexicon, mel_out;
  std::uint64_t seed = 0;
  std::size_t max_frames = 1000;
  std::size_t lbfgs_iters = 100;
  std::size_t gl_iters = 100;
};

struct InvertArgs {
  std::string mel, method = "lbfgs_then_gl", out;
  std::size_t lbfgs_iters = 100;
  std::size_t gl_iters = 100;
  std::uint64_t seed = 0;
};

struct BenchArgs {
  std::string fixture;
  std::size_t runs = 3;
  std::uint64_t seed = 0;
  bool wavenet_placeholders = false;
};

void log_config(std::ostream& err, const std::string& command, const json& fields) {
  err << json{{"command", command}, {"config", fields}}.dump() << '\n';
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

int cmd_prepare(const PrepareArgs& a, std::ostream& out, std::ostream& err) {
  log_config(err, "prepare",
             {{"manifest", a.manifest}, {"lexicon", a.lexicon}, {"out", a.out},
              {"valid_fraction", a.valid_fraction}});
  trainer::prepare_dataset(a.manifest, a.lexicon, a.out, {a.valid_fraction});
  out << "prepared " << a.out << '\n';
  return kOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  auto corpus = std::make_shared<const trainer::TrainingCorpus>(trainer::load_prepared(a.data));
  std::unique_ptr<trainer::Trainer> t;
  if (!a.resume.empty()) {
    t = trainer::Trainer::resume(trainer::Checkpoint::load(a.resume), corpus);
  } else {
    trainer::TrainConfig config = trainer::load_config(a.config);
    if (a.seed) config.seed = *a.seed;
    t = std::make_unique<trainer::Trainer>(config, corpus);
  }
  if (a.steps) t->set_training_steps(*a.steps);
  const trainer::TrainConfig& config = t->config();
  log_config(err, "train",
             {{"data", a.data}, {"out", a.out}, {"resume", a.resume},
              {"utterances", corpus->utterances.size()}, {"settings", trainer::to_text(config)}});
  std::filesystem::create_directories(a.out);
  std::ofstream log(std::filesystem::path(a.out) / "train_log.jsonl", std::ios::app);
  const auto losses = trainer::train_loop(*t, {a.out, &log});
  if (!losses.empty()) {
    out << "step " << t->steps_done() << " first loss " << losses.front() << " last loss "
        << losses.back() << '\n';
  }
  return kOk;
}

text::MixedSequence encode_for_mode(const std::string& mode, const text::UtteranceRecord& record,
                                    const text::Lexicon& lexicon) {
  if (mode == "chars") return text::encode_fixed(record, lexicon, text::FixedMode::kChars);
  if (mode == "pwcb") return text::encode_fixed(record, lexicon, text::FixedMode::kPwcb);
  if (mode.rfind("mixed:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      std::size_t used = 0;
      seed = std::stoull(mode.substr(6), &used);
      if (used != mode.size() - 6) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw CLI::ValidationError("--mode", "mixed:SEED needs an integer seed");
    }
    Rng rng(seed);
    return text::mix_words(record, lexicon, 0.5, rng);
  }
  throw CLI::ValidationError("--mode", "expected chars, pwcb or mixed:SEED");
}

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  const auto loaded = trainer::load_model(trainer::Checkpoint::load(a.ckpt));
  const std::string lexicon_text = a.lexicon.empty() ? loaded.lexicon_text : read_text(a.lexicon);
  const text::Lexicon lexicon = text::parse_lexicon(lexicon_text);
  const auto record = text::make_record("synth", a.text, std::nullopt, {}, &lexicon);
  const auto seq = encode_for_mode(a.mode, record, lexicon);
  std::string mask;
  for (int m : seq.mask) mask += static_cast<char>('0' + m);
  log_config(err, "synth",
             {{"ckpt", a.ckpt}, {"text", a.text}, {"normalized", record.normalized_text},
              {"mode", a.mode}, {"lexicon", a.lexicon.empty() ? "<checkpoint>" : a.lexicon},
              {"seed", a.seed}, {"max_frames", a.max_frames}, {"lbfgs_iters", a.lbfgs_iters},
              {"gl_iters", a.gl_iters}, {"symbols", text::describe(seq)}, {"mask", mask},
              {"out", a.out}});
  Model model = loaded.model;
  Rng rng(a.seed);
  const GenerationResult gen = model.generate(seq, a.max_frames, rng);
  const dsp::MelSpectrogram raw =
      dsp::denormalize({gen.frames, true, loaded.stats});
  if (!a.mel_out.empty()) dsp::save_mel(a.mel_out, raw.frames);
  inversion::InversionConfig inv{inversion::Method::kLbfgsThenGl, a.lbfgs_iters, a.gl_iters, 10,
                                 a.seed};
  const dsp::Waveform w = inversion::invert(raw.frames, inv);
  dsp::write_wav(a.out, w);
  out << "wrote " << a.out << " (" << gen.frames.rows() << " frames, "
      << (gen.stopped_by_attention ? "attention stop" : "frame limit") << ")\n";
  return kOk;
}

int cmd_invert(const InvertArgs& a, std::ostream& out, std::ostream& err) {
  const inversion::Method method = inversion::parse_method(a.method);
  log_config(err, "invert",
             {{"mel", a.mel}, {"method", a.method}, {"lbfgs_iters", a.lbfgs_iters},
              {"gl_iters", a.gl_iters}, {"seed", a.seed}, {"out", a.out}});
  const Matrix target = dsp::load_mel(a.mel);
  const inversion::InversionConfig config{method, a.lbfgs_iters, a.gl_iters, 10, a.seed};
  const dsp::Waveform w = inversion::invert(target, config);
  dsp::write_wav(a.out, w);
  out << "wrote " << a.out << " (" << inversion::label(config) << ", log-mel mse "
      << inversion::logmel_mse(w, target) << ")\n";
  return kOk;
}

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(a.fixture)) throw MissingFile(a.fixture);
  for (const auto& e : std::filesystem::directory_iterator(a.fixture)) {
    if (e.path().extension() == ".wav") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw EmptyCorpus();
  std::vector<dsp::Waveform> fixture;
  for (const auto& f : files) fixture.push_back(dsp::read_wav(f));
  const auto methods = inversion::reference_methods(a.seed);
  json labels = json::array();
  for (const auto& m : methods) labels.push_back(inversion::label(m));
  log_config(err, "bench",
             {{"fixture", a.fixture}, {"clips", files.size()}, {"runs", a.runs},
              {"seed", a.seed}, {"methods", labels},
              {"wavenet_placeholders", a.wavenet_placeholders}});
  for (const auto& r : inversion::bench_strtf(methods, fixture, a.runs)) {
    out << json{{"label", r.label},
                {"seconds_per_sample", r.seconds_per_sample},
                {"strtf", r.strtf},
                {"audio_seconds", r.audio_seconds},
                {"wall_time", r.wall_time}}
               .dump()
        << '\n';
  }
  if (a.wavenet_placeholders) {
    for (const char* label : {"WaveNet", "100 L + GL + WaveNet", "1000 L + GL + WaveNet"}) {
      out << json{{"label", label}, {"status", "out_of_scope"}}.dump() << '\n';
    }
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mixtts: text to speech from mixed character and phoneme input", "mixtts"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  PrepareArgs prep;
  auto* prepare = app.add_subcommand("prepare", "normalize transcripts and cache log-mel features");
  prepare->add_option("--manifest", prep.manifest, "id|raw|normalized manifest")->required();
  prepare->add_option("--lexicon", prep.lexicon, "word<TAB>phones lexicon")->required();
  prepare->add_option("--out", prep.out, "output directory")->required();
  prepare->add_option("--valid-fraction", prep.valid_fraction, "held-out trailing fraction")
      ->check(CLI::Range(0.0, 1.0));
  std::uint64_t prepare_seed = 0;
  prepare->add_option("--seed", prepare_seed, "accepted for uniformity; preparation is not random");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "train with truncated BPTT");
  train->add_option("--config", tr.config, "key = value configuration file");
  train->add_option("--data", tr.data, "prepared data directory")->required();
  train->add_option("--out", tr.out, "checkpoint and log directory")->required();
  train->add_option("--resume", tr.resume, "checkpoint to resume from");
  train->add_option("--seed", tr.seed, "override the configured seed");
  train->add_option("--steps", tr.steps, "override the number of training steps");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "text to waveform");
  synth->add_option("--ckpt", sy.ckpt, "checkpoint")->required();
  synth->add_option("--text", sy.text, "input text")->required();
  synth->add_option("--mode", sy.mode, "chars, pwcb or mixed:SEED");
  synth->add_option("--out", sy.out, "output wav")->required();
  synth->add_option("--lexicon", sy.lexicon, "lexicon overriding the checkpoint's");
  synth->add_option("--mel-out", sy.mel_out, "also write the raw log-mel prediction");
  synth->add_option("--seed", sy.seed, "dropout and inversion seed");
  synth->add_option("--max-frames", sy.max_frames, "generation cap")->check(CLI::PositiveNumber);
  synth->add_option("--lbfgs-iters", sy.lbfgs_iters)->check(CLI::PositiveNumber);
  synth->add_option("--gl-iters", sy.gl_iters)->check(CLI::PositiveNumber);

  InvertArgs iv;
  auto* invert = app.add_subcommand("invert", "log-mel file to waveform");
  invert->add_option("--mel", iv.mel, "MIXMEL01 raw log-mel file")->required();
  invert->add_option("--method", iv.method, "lbfgs, griffin_lim or lbfgs_then_gl");
  invert->add_option("--out", iv.out, "output wav")->required();
  invert->add_option("--lbfgs-iters", iv.lbfgs_iters)->check(CLI::PositiveNumber);
  invert->add_option("--gl-iters", iv.gl_iters)->check(CLI::PositiveNumber);
  invert->add_option("--seed", iv.seed);

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "time the inversion methods");
  bench->add_option("--fixture", be.fixture, "directory of 22.05 kHz mono wavs")->required();
  bench->add_option("--runs", be.runs, "timed runs per method (median reported)")
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", be.seed);
  bench->add_flag("--with-wavenet-placeholders", be.wavenet_placeholders,
                  "also list the neural vocoder rows as out of scope");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (train->parsed() && tr.config.empty() && tr.resume.empty()) {
      throw CLI::ValidationError("train", "--config or --resume is required");
    }
    if (prepare->parsed()) return cmd_prepare(prep, out, err);
    if (train->parsed()) return cmd_train(tr, out, err);
    if (synth->parsed()) return cmd_synth(sy, out, err);
    if (invert->parsed()) return cmd_invert(iv, out, err);
    if (bench->parsed()) return cmd_bench(be, out, err);
  } catch (const CLI::Error& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace mixtts::cli
