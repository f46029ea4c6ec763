// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
//
// Writes the synthetic toy corpus (metadata.csv, wavs/, lexicon.txt) and,
// optionally, a directory of speech-like clips for the inversion benchmark.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mixtts/error.hpp"
#include "mixtts/synthetic.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"write the synthetic toy corpus", "mixtts_toy_corpus"};
  std::string out;
  std::size_t count = 5;
  std::uint64_t seed = 1;
  std::string clips_dir;
  std::size_t clips = 10;
  double clip_seconds = 2.0;
  app.add_option("--out", out, "corpus directory")->required();
  app.add_option("--count", count, "number of utterances")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed);
  app.add_option("--clips-dir", clips_dir, "also write speech-like clips here");
  app.add_option("--clips", clips)->check(CLI::PositiveNumber);
  app.add_option("--clip-seconds", clip_seconds)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    const auto corpus = mixtts::synthetic::toy_corpus(count, seed);
    fs::create_directories(fs::path(out) / "wavs");
    std::ofstream manifest(fs::path(out) / "metadata.csv", std::ios::binary);
    for (std::size_t i = 0; i < corpus.manifest.size(); ++i) {
      const auto& e = corpus.manifest[i];
      manifest << e.id << '|' << e.raw_text << '|' << e.normalized_text << '\n';
      mixtts::dsp::write_wav(fs::path(out) / "wavs" / (e.id + ".wav"), corpus.audio[i]);
    }
    std::ofstream(fs::path(out) / "lexicon.txt", std::ios::binary)
        << mixtts::synthetic::toy_lexicon_text();

    if (!clips_dir.empty()) {
      fs::create_directories(clips_dir);
      for (std::size_t i = 0; i < clips; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "clip%02zu.wav", i);
        mixtts::dsp::write_wav(fs::path(clips_dir) / name,
                               mixtts::synthetic::speechlike(seed * 1000 + i, clip_seconds));
      }
    }
  } catch (const mixtts::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
