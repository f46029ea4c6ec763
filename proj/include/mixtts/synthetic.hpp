// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
//
// Deterministic speech-like audio used where recorded speech is unavailable:
// free-form clips for inversion experiments and a small phone-driven corpus
// with a matching lexicon for training experiments.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixtts/dsp.hpp"
#include "mixtts/textfrontend.hpp"

namespace mixtts::synthetic {

/// Glottal pulse train with a wandering pitch through three formant
/// resonators, interleaved with fricative noise and near-silent gaps.
/// Peak amplitude 0.6.
dsp::Waveform speechlike(std::uint64_t seed, double seconds);

/// Renders words given as phoneme lists: each phoneme is a fixed voiced
/// sound (pitch and formants derived from the phoneme) lasting
/// `frames_per_phone` hops, words separated by `gap_frames` of silence.
dsp::Waveform render_phones(const std::vector<std::vector<std::string>>& words,
                            std::size_t frames_per_phone = 10, std::size_t gap_frames = 4);

struct ToyCorpus {
  text::Lexicon lexicon;
  std::vector<text::ManifestEntry> manifest;
  std::vector<dsp::Waveform> audio;
};

/// `count` short sentences over a ten-word vocabulary. The first five are
/// fixed; later ones are drawn from `seed`.
ToyCorpus toy_corpus(std::size_t count = 5, std::uint64_t seed = 1);

/// Lexicon text for the toy vocabulary, one `word<TAB>phones` line each.
std::string toy_lexicon_text();

}  // namespace mixtts::synthetic
