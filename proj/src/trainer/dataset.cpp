// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mixtts/trainer.hpp"

namespace mixtts::trainer {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_if_changed(const std::filesystem::path& path, const std::string& bytes) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    if (ss.str() == bytes) return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string format_stats(const dsp::NormStats& stats) {
  std::string out;
  char buf[96];
  for (std::size_t d = 0; d < stats.mean.size(); ++d) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", stats.mean[d], stats.std[d]);
    out += buf;
  }
  return out;
}

dsp::NormStats parse_stats(std::string_view text) {
  dsp::NormStats s;
  std::istringstream in{std::string(text)};
  double m, sd;
  while (in >> m >> sd) {
    if (!(sd > 0.0) || !std::isfinite(m)) throw DataError("normalization statistics are invalid");
    s.mean.push_back(m);
    s.std.push_back(sd);
  }
  if (s.mean.size() != dsp::kMels) throw DataError("normalization statistics need 80 rows");
  return s;
}

void prepare_dataset(const std::filesystem::path& manifest, const std::filesystem::path& lexicon,
                     const std::filesystem::path& out_dir, const PrepareOptions& options) {
  const auto entries = text::load_manifest(manifest);
  if (entries.empty()) throw EmptyCorpus();
  const std::string lexicon_text = read_file(lexicon);
  const text::Lexicon lex = text::parse_lexicon(lexicon_text);
  const auto wav_dir = manifest.parent_path() / "wavs";

  std::filesystem::create_directories(out_dir / "mels");
  const auto held_out = static_cast<std::size_t>(
      std::floor(options.valid_fraction * static_cast<double>(entries.size())));
  const std::size_t train_count = entries.size() - held_out;

  std::vector<Matrix> train_features;
  std::string records;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const auto record = text::make_record(
        e.id, e.raw_text,
        e.normalized_text.empty() ? std::nullopt : std::optional<std::string>(e.normalized_text),
        wav_dir / (e.id + ".wav"), &lex);
    if (record.char_words.empty()) {
      throw DataError("utterance " + e.id + " has no words after normalization");
    }
    const dsp::Waveform w = dsp::read_wav(record.audio_path);
    Matrix mel = dsp::logmel(w).frames;
    write_if_changed(out_dir / "mels" / (e.id + ".mel"), dsp::encode_mel(mel));
    const bool train = i < train_count;
    records += e.id + "\t" + (train ? "train" : "valid") + "\t" + e.raw_text + "\t" +
               record.normalized_text + "\t" + std::to_string(mel.rows()) + "\n";
    if (train) train_features.push_back(std::move(mel));
  }
  write_if_changed(out_dir / "records.tsv", records);
  write_if_changed(out_dir / "stats.txt", format_stats(dsp::compute_stats(train_features)));
  write_if_changed(out_dir / "lexicon.txt", lexicon_text);
}

TrainingCorpus load_prepared(const std::filesystem::path& dir, std::string_view split_name) {
  TrainingCorpus corpus;
  corpus.lexicon_text = read_file(dir / "lexicon.txt");
  corpus.lexicon = text::parse_lexicon(corpus.lexicon_text);
  corpus.stats = parse_stats(read_file(dir / "stats.txt"));
  std::istringstream in(read_file(dir / "records.tsv"));
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 5) throw MalformedLine(line_no, "records.tsv needs 5 columns");
    if (cols[1] != split_name) continue;
    TrainingUtterance u;
    u.record = text::make_record(cols[0], cols[2], cols[3], {}, &corpus.lexicon);
    dsp::MelSpectrogram raw{dsp::load_mel(dir / "mels" / (cols[0] + ".mel")), false, std::nullopt};
    u.frames = dsp::normalize(raw, corpus.stats).frames;
    corpus.utterances.push_back(std::move(u));
  }
  if (corpus.utterances.empty()) throw EmptyCorpus();
  return corpus;
}

TrainingCorpus make_corpus(const std::vector<text::ManifestEntry>& manifest,
                           const std::vector<dsp::Waveform>& audio,
                           const std::string& lexicon_text) {
  if (manifest.empty() || manifest.size() != audio.size()) throw EmptyCorpus();
  TrainingCorpus corpus;
  corpus.lexicon_text = lexicon_text;
  corpus.lexicon = text::parse_lexicon(lexicon_text);
  std::vector<Matrix> raw;
  for (const auto& w : audio) raw.push_back(dsp::logmel(w).frames);
  corpus.stats = dsp::compute_stats(raw);
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& e = manifest[i];
    TrainingUtterance u;
    u.record = text::make_record(
        e.id, e.raw_text,
        e.normalized_text.empty() ? std::nullopt : std::optional<std::string>(e.normalized_text),
        {}, &corpus.lexicon);
    u.frames = dsp::normalize({raw[i], false, std::nullopt}, corpus.stats).frames;
    corpus.utterances.push_back(std::move(u));
  }
  return corpus;
}

}  // namespace mixtts::trainer
