// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include "mixtts/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <numbers>

#include "mixtts/random.hpp"

namespace mixtts::synthetic {

namespace {

constexpr double kSr = dsp::kSampleRate;

/// Two-pole resonator with unit-ish gain at the centre frequency.
void resonate(std::vector<double>& x, double freq, double bandwidth) {
  const double r = std::exp(-std::numbers::pi * bandwidth / kSr);
  const double a1 = -2.0 * r * std::cos(2.0 * std::numbers::pi * freq / kSr);
  const double a2 = r * r;
  double y1 = 0.0, y2 = 0.0;
  for (auto& v : x) {
    const double y = (1.0 - r) * v - a1 * y1 - a2 * y2;
    y2 = y1;
    y1 = y;
    v = y;
  }
}

/// Pulse train following a per-sample f0 contour; `phase` carries over.
std::vector<double> pulses(const std::vector<double>& f0, double& phase) {
  std::vector<double> out(f0.size(), 0.0);
  for (std::size_t n = 0; n < f0.size(); ++n) {
    const double next = phase + f0[n] / kSr;
    if (std::floor(next) > std::floor(phase)) out[n] = 1.0;
    phase = next;
  }
  return out;
}

void normalize_peak(std::vector<double>& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0) {
    for (auto& v : x) v *= peak / m;
  }
}

const std::vector<std::pair<std::string, std::string>>& toy_words() {
  static const std::vector<std::pair<std::string, std::string>> words{
      {"the", "dh ah"}, {"cat", "k ae t"}, {"sat", "s ae t"}, {"on", "aa n"},
      {"mat", "m ae t"}, {"dog", "d ao g"}, {"ran", "r ae n"}, {"far", "f aa r"},
      {"a", "ah"},       {"big", "b ih g"}};
  return words;
}

}  // namespace

dsp::Waveform speechlike(std::uint64_t seed, double seconds) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(kSr * seconds);
  const double rate = 0.3 + 1.2 * rng.uniform();
  const double offset = 6.0 * rng.uniform();
  const double base = 120.0 + 40.0 * (rng.uniform() - 0.5);
  std::vector<double> f0(n);
  for (std::size_t i = 0; i < n; ++i) {
    f0[i] = base + 40.0 * std::sin(2.0 * std::numbers::pi * rate * i / kSr + offset);
  }
  double phase = 0.0;
  const std::vector<double> source = pulses(f0, phase);

  dsp::Waveform w;
  w.samples.assign(n, 0.0);
  std::size_t start = 0;
  while (start < n) {
    const std::size_t end =
        std::min(n, start + static_cast<std::size_t>(kSr * (0.08 + 0.17 * rng.uniform())));
    const std::size_t len = end - start;
    const double kind = rng.uniform();
    std::vector<double> seg(len);
    if (kind < 0.65) {
      std::copy_n(source.begin() + static_cast<std::ptrdiff_t>(start), len, seg.begin());
      resonate(seg, 300.0 + 600.0 * rng.uniform(), 80.0);
      resonate(seg, 900.0 + 1600.0 * rng.uniform(), 120.0);
      resonate(seg, 2400.0 + 1100.0 * rng.uniform(), 200.0);
    } else if (kind < 0.85) {
      for (auto& v : seg) v = 0.05 * rng.normal();
      resonate(seg, 3000.0 + 3000.0 * rng.uniform(), 1500.0);
    } else {
      for (auto& v : seg) v = 1e-3 * rng.normal();
    }
    for (std::size_t i = 0; i < len; ++i) {
      const double env =
          len > 2 ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (len - 1)) : 1.0;
      w.samples[start + i] = seg[i] * (0.3 + 0.7 * env);
    }
    start = end;
  }
  normalize_peak(w.samples, 0.6);
  return w;
}

dsp::Waveform render_phones(const std::vector<std::vector<std::string>>& words,
                            std::size_t frames_per_phone, std::size_t gap_frames) {
  const auto& inventory = text::SymbolInventory::standard();
  const std::size_t phone_len = frames_per_phone * dsp::kHop;
  const std::size_t gap_len = gap_frames * dsp::kHop;
  dsp::Waveform w;
  w.samples.assign(gap_len, 0.0);
  double phase = 0.0;
  for (std::size_t wi = 0; wi < words.size(); ++wi) {
    if (wi > 0) w.samples.insert(w.samples.end(), gap_len, 0.0);
    for (const auto& phone : words[wi]) {
      const auto id = inventory.phone_id(phone);
      if (!id) throw DataError("render_phones: unknown phoneme '" + phone + "'");
      // Stable per-phoneme voice: pitch and formants from the phoneme id.
      Rng voice(0x5eed0000u + static_cast<std::uint64_t>(*id));
      const double pitch = 100.0 + 60.0 * voice.uniform();
      const double f1 = 300.0 + 600.0 * voice.uniform();
      const double f2 = 900.0 + 1600.0 * voice.uniform();
      const double f3 = 2400.0 + 2400.0 * voice.uniform();
      std::vector<double> seg = pulses(std::vector<double>(phone_len, pitch), phase);
      resonate(seg, f1, 80.0);
      resonate(seg, f2, 120.0);
      resonate(seg, f3, 200.0);
      for (std::size_t i = 0; i < phone_len; ++i) {
        const double edge = std::min<double>({1.0, i / 64.0, (phone_len - 1 - i) / 64.0});
        seg[i] *= edge;
      }
      w.samples.insert(w.samples.end(), seg.begin(), seg.end());
    }
  }
  w.samples.insert(w.samples.end(), gap_len + dsp::kWindow, 0.0);
  normalize_peak(w.samples, 0.6);
  return w;
}

std::string toy_lexicon_text() {
  std::string out;
  for (const auto& [word, phones] : toy_words()) out += word + "\t" + phones + "\n";
  return out;
}

ToyCorpus toy_corpus(std::size_t count, std::uint64_t seed) {
  static const std::vector<std::string> fixed{"the cat sat on the mat", "a big dog ran far",
                                              "the dog sat", "a cat ran on a mat",
                                              "the big cat sat far"};
  ToyCorpus corpus;
  corpus.lexicon = text::parse_lexicon(toy_lexicon_text());
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    std::string sentence;
    if (i < fixed.size()) {
      sentence = fixed[i];
    } else {
      const std::size_t words = 2 + rng.index(5);
      for (std::size_t j = 0; j < words; ++j) {
        if (j) sentence += ' ';
        sentence += toy_words()[rng.index(toy_words().size())].first;
      }
    }
    std::vector<std::vector<std::string>> phones;
    for (const auto& tok : text::tokenize(sentence)) {
      if (tok.kind != text::Token::Kind::kWord) continue;
      phones.push_back(*corpus.lexicon.find(tok.text));
    }
    char id[32];
    std::snprintf(id, sizeof id, "toy%03zu", i);
    std::string raw = sentence;
    raw[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(raw[0])));
    corpus.manifest.push_back({id, raw + ".", sentence + "."});
    corpus.audio.push_back(render_phones(phones));
  }
  return corpus;
}

}  // namespace mixtts::synthetic
