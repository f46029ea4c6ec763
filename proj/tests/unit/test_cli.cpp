// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "mixtts/cli.hpp"
#include "mixtts/synthetic.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace mixtts;
using mixtts::testing::fresh_dir;
using mixtts::testing::slurp;
using mixtts::testing::spit;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "mixtts");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json first_json(const std::string& text) {
  return nlohmann::json::parse(text.substr(0, text.find('\n')));
}

// Toy corpus, prepared data and a two-step checkpoint, built once.
struct Workspace {
  fs::path root, corpus, data, run_dir, ckpt;

  Workspace() {
    root = fresh_dir("cli");
    corpus = root / "corpus";
    data = root / "data";
    run_dir = root / "run";
    const auto toy = synthetic::toy_corpus(5, 1);
    fs::create_directories(corpus / "wavs");
    std::string manifest;
    for (std::size_t i = 0; i < toy.manifest.size(); ++i) {
      const auto& e = toy.manifest[i];
      manifest += e.id + "|" + e.raw_text + "|" + e.normalized_text + "\n";
      dsp::write_wav(corpus / "wavs" / (e.id + ".wav"), toy.audio[i]);
    }
    spit(corpus / "metadata.csv", manifest);
    spit(corpus / "lexicon.txt", synthetic::toy_lexicon_text());
    spit(root / "train.cfg", "preset = toy\ntbptt_length = 64\ncheckpoint_every = 100\n");
    REQUIRE(run({"prepare", "--manifest", (corpus / "metadata.csv").string(), "--lexicon",
                 (corpus / "lexicon.txt").string(), "--out", data.string()})
                .code == 0);
    const auto r = run({"train", "--config", (root / "train.cfg").string(), "--data", data.string(),
                        "--out", run_dir.string(), "--steps", "2"});
    REQUIRE(r.code == 0);
    ckpt = run_dir / "latest.bin";
  }
};

Workspace& ws() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  CHECK(run({"synth", "--text", "hi"}).code == cli::kUsage);
  CHECK(run({"--help"}).code == cli::kOk);
  const auto bad_mode = run({"synth", "--ckpt", ws().ckpt.string(), "--text", "the cat", "--mode",
                             "mixed:abc", "--out", (ws().root / "x.wav").string()});
  CHECK(bad_mode.code == cli::kUsage);
}

TEST_CASE("data errors") {
  const auto r = run({"invert", "--mel", "/nonexistent.mel", "--out", "/tmp/x.wav"});
  CHECK(r.code == cli::kData);
  CHECK(r.err.find("missing") != std::string::npos);
  CHECK(run({"prepare", "--manifest", "/nonexistent.csv", "--lexicon", "/nonexistent.txt", "--out",
             (ws().root / "nowhere").string()})
            .code == cli::kData);
  spit(ws().root / "bad.cfg", "learning_rate = fast\n");
  CHECK(run({"train", "--config", (ws().root / "bad.cfg").string(), "--data", ws().data.string(),
             "--out", (ws().root / "badrun").string()})
            .code == cli::kData);
}

TEST_CASE("prepare is idempotent") {
  const auto before = slurp(ws().data / "records.tsv");
  const auto stats = slurp(ws().data / "stats.txt");
  CHECK(run({"prepare", "--manifest", (ws().corpus / "metadata.csv").string(), "--lexicon",
             (ws().corpus / "lexicon.txt").string(), "--out", ws().data.string()})
            .code == 0);
  CHECK(slurp(ws().data / "records.tsv") == before);
  CHECK(slurp(ws().data / "stats.txt") == stats);
}

TEST_CASE("train logs its configuration and steps") {
  CHECK(fs::exists(ws().ckpt));
  const auto log = slurp(ws().run_dir / "train_log.jsonl");
  std::istringstream in(log);
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line); ++lines) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("loss"));
    CHECK(j.contains("wall_time"));
  }
  CHECK(lines == 2);
}

TEST_CASE("synth modes") {
  const auto lexicon = (ws().corpus / "lexicon.txt").string();
  auto synth = [&](const std::string& mode, const std::string& text) {
    return run({"synth", "--ckpt", ws().ckpt.string(), "--text", text, "--mode", mode, "--out",
                (ws().root / (mode.substr(0, 5) + ".wav")).string(), "--lexicon", lexicon,
                "--max-frames", "40", "--lbfgs-iters", "3", "--gl-iters", "3"});
  };
  const auto chars = synth("chars", "the cat sat");
  REQUIRE(chars.code == 0);
  const auto pwcb = synth("pwcb", "the cat sat");
  REQUIRE(pwcb.code == 0);
  const auto cm = first_json(chars.err)["config"]["mask"].get<std::string>();
  const auto pm = first_json(pwcb.err)["config"]["mask"].get<std::string>();
  CHECK(cm.find('1') == std::string::npos);
  CHECK(pm.find('1') != std::string::npos);
  CHECK(cm != pm);

  const auto oov = synth("pwcb", "the zyzzyva sat");
  CHECK(oov.code == 0);
  CHECK(synth("mixed:4", "the cat sat").code == 0);
  const auto wav = dsp::read_wav(ws().root / "pwcb.wav");
  CHECK(!wav.samples.empty());
}

TEST_CASE("invert and bench") {
  const auto clips = ws().root / "clips";
  fs::create_directories(clips);
  const auto w = synthetic::speechlike(3, 0.1);
  dsp::write_wav(clips / "a.wav", w);
  dsp::save_mel(ws().root / "a.mel", dsp::logmel(w).frames);
  const auto inv = run({"invert", "--mel", (ws().root / "a.mel").string(), "--out",
                        (ws().root / "inv.wav").string(), "--lbfgs-iters", "3", "--gl-iters", "3"});
  CHECK(inv.code == 0);
  CHECK(fs::exists(ws().root / "inv.wav"));

  const auto bench = run({"bench", "--fixture", clips.string(), "--runs", "1",
                          "--with-wavenet-placeholders"});
  REQUIRE(bench.code == 0);
  std::istringstream in(bench.out);
  std::size_t measured = 0, placeholders = 0;
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    if (j.contains("status")) {
      CHECK(j["status"] == "out_of_scope");
      ++placeholders;
    } else {
      CHECK(j["strtf"].get<double>() > 0.0);
      ++measured;
    }
  }
  CHECK(measured == 5);
  CHECK(placeholders == 3);
  CHECK(run({"bench", "--fixture", (ws().root / "empty_fixture").string()}).code == cli::kData);
}
