// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <algorithm>
#include <cmath>
#include <numbers>

#include "mixtts/inversion.hpp"
#include "mixtts/random.hpp"

namespace mixtts::inversion {

double spectral_convergence(std::span<const double> w, const Matrix& target) {
  const Matrix mag = dsp::stft_mag(w);
  if (mag.rows() != target.rows()) throw ShapeMismatch("spectral_convergence: frame count");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const double d = mag.data()[i] - target.data()[i];
    num += d * d;
    den += target.data()[i] * target.data()[i];
  }
  return den == 0.0 ? 0.0 : std::sqrt(num / den);
}

GriffinLimResult griffin_lim(const Matrix& magnitude, std::size_t iters, const PhaseInit& init) {
  if (magnitude.rows() == 0) throw TooShort("magnitude target has no frames");
  if (magnitude.cols() != dsp::kBins) throw ShapeMismatch("griffin_lim: expected 257 bins");
  for (double v : magnitude.data()) {
    if (!(v >= 0.0)) throw BadMagnitude("griffin_lim: magnitudes must be non-negative");
  }
  dsp::Spectrogram spec;
  spec.frames = magnitude.rows();
  spec.bins.resize(magnitude.size());
  if (init.waveform) {
    if (dsp::frame_count(init.waveform->size()) != magnitude.rows()) {
      throw ShapeMismatch("griffin_lim: initial waveform frame count");
    }
    const dsp::Spectrogram seed = dsp::stft(*init.waveform);
    for (std::size_t i = 0; i < spec.bins.size(); ++i) {
      const double a = std::abs(seed.bins[i]);
      spec.bins[i] = a > 0.0 ? seed.bins[i] * (magnitude.data()[i] / a)
                             : dsp::Complex(magnitude.data()[i], 0.0);
    }
  } else {
    Rng rng(init.seed);
    for (std::size_t i = 0; i < spec.bins.size(); ++i) {
      spec.bins[i] = std::polar(magnitude.data()[i], 2.0 * std::numbers::pi * rng.uniform());
    }
  }

  GriffinLimResult out;
  std::vector<double> w = dsp::istft(spec);
  for (std::size_t it = 0; it < iters; ++it) {
    const dsp::Spectrogram rebuilt = dsp::stft(w);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < spec.bins.size(); ++i) {
      const double target = magnitude.data()[i];
      const double a = std::abs(rebuilt.bins[i]);
      num += (a - target) * (a - target);
      den += target * target;
      spec.bins[i] = a > 0.0 ? rebuilt.bins[i] * (target / a) : dsp::Complex(target, 0.0);
    }
    out.convergence.push_back(den == 0.0 ? 0.0 : std::sqrt(num / den));
    w = dsp::istft(spec);
  }
  out.waveform.samples = std::move(w);
  return out;
}

Matrix mel_corrected_magnitude(const Matrix& target, const Matrix& reference) {
  if (target.rows() != reference.rows() || target.cols() != dsp::kMels ||
      reference.cols() != dsp::kBins) {
    throw ShapeMismatch("mel_corrected_magnitude: shapes");
  }
  const auto& bank = dsp::MelBank::standard();
  std::vector<double> coverage(dsp::kBins, 0.0);
  for (std::size_t b = 0; b < dsp::kMels; ++b) {
    for (std::size_t k = bank.begin[b]; k < bank.end[b]; ++k) coverage[k] += bank.weights(b, k);
  }
  Matrix out = reference;
  std::vector<double> ratio(dsp::kMels), gain(dsp::kBins);
  for (std::size_t t = 0; t < target.rows(); ++t) {
    const auto ref = reference.row(t);
    for (std::size_t b = 0; b < dsp::kMels; ++b) {
      double mel = 0.0;
      for (std::size_t k = bank.begin[b]; k < bank.end[b]; ++k) mel += bank.weights(b, k) * ref[k];
      ratio[b] = std::exp(target(t, b)) / std::max(mel, dsp::kLogFloor);
    }
    std::fill(gain.begin(), gain.end(), 0.0);
    for (std::size_t b = 0; b < dsp::kMels; ++b) {
      for (std::size_t k = bank.begin[b]; k < bank.end[b]; ++k) {
        gain[k] += bank.weights(b, k) * ratio[b];
      }
    }
    auto row = out.row(t);
    for (std::size_t k = 0; k < dsp::kBins; ++k) {
      if (coverage[k] > 0.0) row[k] *= gain[k] / coverage[k];
    }
  }
  return out;
}

}  // namespace mixtts::inversion
