// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <algorithm>
#include <cmath>

#include "mixtts/dsp.hpp"

namespace mixtts::dsp {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_matrix(std::size_t n_mels, double f_lo, double f_hi, std::size_t n_fft,
                  int sample_rate) {
  if (!(f_lo >= 0.0 && f_lo < f_hi && f_hi <= sample_rate / 2.0) || n_mels == 0) {
    throw BadRange("mel range [" + std::to_string(f_lo) + ", " + std::to_string(f_hi) +
                   "] invalid for sample rate " + std::to_string(sample_rate));
  }
  const std::size_t bins = n_fft / 2 + 1;
  const double m_lo = hz_to_mel(f_lo), m_hi = hz_to_mel(f_hi);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(m_lo + (m_hi - m_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_mels + 1));
  }
  Matrix m(n_mels, bins);
  for (std::size_t b = 0; b < n_mels; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / static_cast<double>(n_fft);
      double v = 0.0;
      if (f > lo && f <= mid) {
        v = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        v = (hi - f) / (hi - mid);
      }
      m(b, k) = v;
    }
  }
  return m;
}

MelBank::MelBank(Matrix w) : weights(std::move(w)) {
  for (std::size_t b = 0; b < weights.rows(); ++b) {
    std::size_t lo = weights.cols(), hi = 0;
    for (std::size_t k = 0; k < weights.cols(); ++k) {
      if (weights(b, k) != 0.0) {
        lo = std::min(lo, k);
        hi = k + 1;
      }
    }
    if (hi == 0) lo = 0;
    begin.push_back(lo);
    end.push_back(hi);
  }
}

const MelBank& MelBank::standard() {
  static const MelBank bank(mel_matrix());
  return bank;
}

Matrix logmel_from_magnitude(const Matrix& magnitude) {
  if (magnitude.cols() != kBins) throw ShapeMismatch("logmel: expected 257 bins");
  const auto& bank = MelBank::standard();
  Matrix out(magnitude.rows(), kMels);
  for (std::size_t t = 0; t < magnitude.rows(); ++t) {
    const auto mag = magnitude.row(t);
    for (std::size_t b = 0; b < kMels; ++b) {
      double acc = 0.0;
      for (std::size_t k = bank.begin[b]; k < bank.end[b]; ++k) acc += bank.weights(b, k) * mag[k];
      out(t, b) = std::log(std::max(acc, kLogFloor));
    }
  }
  return out;
}

MelSpectrogram logmel(const Waveform& w, bool normalize_output,
                      const std::optional<NormStats>& stats) {
  MelSpectrogram m;
  m.frames = logmel_from_magnitude(stft_mag(w.samples));
  if (normalize_output) {
    if (!stats) throw DataError("logmel: normalization requested without statistics");
    return normalize(m, *stats);
  }
  return m;
}

NormStats compute_stats(std::span<const Matrix> features) {
  if (features.empty()) throw EmptyCorpus();
  const std::size_t dims = features.front().cols();
  std::vector<double> sum(dims, 0.0), sq(dims, 0.0);
  double count = 0.0;
  for (const auto& f : features) {
    if (f.cols() != dims) throw ShapeMismatch("compute_stats: feature width");
    for (std::size_t t = 0; t < f.rows(); ++t) {
      for (std::size_t d = 0; d < dims; ++d) sum[d] += f(t, d);
    }
    count += static_cast<double>(f.rows());
  }
  if (count == 0.0) throw EmptyCorpus();
  NormStats s;
  s.mean.resize(dims);
  s.std.resize(dims);
  for (std::size_t d = 0; d < dims; ++d) s.mean[d] = sum[d] / count;
  for (const auto& f : features) {
    for (std::size_t t = 0; t < f.rows(); ++t) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double c = f(t, d) - s.mean[d];
        sq[d] += c * c;
      }
    }
  }
  for (std::size_t d = 0; d < dims; ++d) {
    const double sd = std::sqrt(sq[d] / count);
    s.std[d] = sd < 1e-8 ? 1.0 : sd;
  }
  return s;
}

MelSpectrogram normalize(const MelSpectrogram& m, const NormStats& stats) {
  if (m.normalized) throw DataError("spectrogram is already normalized");
  if (stats.mean.size() != m.frames.cols() || stats.std.size() != m.frames.cols()) {
    throw ShapeMismatch("normalize: statistics width");
  }
  MelSpectrogram out{m.frames, true, stats};
  for (std::size_t t = 0; t < out.frames.rows(); ++t) {
    for (std::size_t d = 0; d < out.frames.cols(); ++d) {
      out.frames(t, d) = (out.frames(t, d) - stats.mean[d]) / stats.std[d];
    }
  }
  return out;
}

MelSpectrogram denormalize(const MelSpectrogram& m) {
  if (!m.normalized) return m;
  if (!m.stats) throw DataError("normalized spectrogram carries no statistics");
  const auto& stats = *m.stats;
  MelSpectrogram out{m.frames, false, std::nullopt};
  for (std::size_t t = 0; t < out.frames.rows(); ++t) {
    for (std::size_t d = 0; d < out.frames.cols(); ++d) {
      out.frames(t, d) = out.frames(t, d) * stats.std[d] + stats.mean[d];
    }
  }
  return out;
}

nn::Tensor logmel_tensor(const nn::Tensor& samples) {
  if (samples.rows() != 1) throw ShapeMismatch("logmel_tensor: expects a 1 x L waveform");
  Spectrogram spec = stft(samples.value());
  const auto& bank = MelBank::standard();
  const std::size_t frames = spec.frames;
  std::vector<double> mag(frames * kBins), mel(frames * kMels), out(frames * kMels);
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(spec.bins[i]);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t b = 0; b < kMels; ++b) {
      double acc = 0.0;
      for (std::size_t k = bank.begin[b]; k < bank.end[b]; ++k) {
        acc += bank.weights(b, k) * mag[t * kBins + k];
      }
      mel[t * kMels + b] = acc;
      out[t * kMels + b] = std::log(std::max(acc, kLogFloor));
    }
  }
  return nn::Tensor::from_op(
      {frames, kMels}, std::move(out), {samples},
      [frames, spec = std::move(spec), mag = std::move(mag),
       mel = std::move(mel)](nn::detail::Node& self) {
        static const std::vector<double> window = hann_window();
        const auto& bank = MelBank::standard();
        double* gx = self.parents[0]->grad.data();
        std::vector<double> gmag(kBins);
        std::vector<Complex> half(2 * kBins);
        std::vector<double> ra(kWindow), rb(kWindow);
        // Half-spectrum weights H_k for frame t; returns false when all zero.
        auto fill = [&](std::size_t t, std::span<Complex> h) {
          std::fill(gmag.begin(), gmag.end(), 0.0);
          bool any = false;
          for (std::size_t b = 0; b < kMels; ++b) {
            const double m = mel[t * kMels + b];
            if (m <= kLogFloor) continue;  // floor branch has zero slope
            const double g = self.grad[t * kMels + b] / m;
            if (g == 0.0) continue;
            any = true;
            for (std::size_t k = bank.begin[b]; k < bank.end[b]; ++k) {
              gmag[k] += g * bank.weights(b, k);
            }
          }
          std::fill(h.begin(), h.end(), Complex{});
          if (!any) return false;
          for (std::size_t k = 0; k < kBins; ++k) {
            const double a = mag[t * kBins + k];
            if (a > 0.0 && gmag[k] != 0.0) h[k] = spec.at(t, k) * (gmag[k] / a);
          }
          // Re(sum_k H_k e^{+i theta_kn}) over the half spectrum equals the
          // inverse transform of the Hermitian spectrum with interior bins halved.
          for (std::size_t k = 1; k + 1 < kBins; ++k) h[k] *= 0.5;
          return true;
        };
        // d|X_k|/dx_n = w_n Re(X_k e^{+i theta_kn}) / |X_k|.
        for (std::size_t t = 0; t < frames; t += 2) {
          const std::span<Complex> ha(half.data(), kBins), hb(half.data() + kBins, kBins);
          const bool use_a = fill(t, ha);
          const bool use_b = t + 1 < frames && fill(t + 1, hb);
          if (!use_a && !use_b) continue;
          irfft_pair(ha, use_b ? std::span<const Complex>(hb) : std::span<const Complex>(), ra, rb);
          if (use_a) {
            for (std::size_t n = 0; n < kWindow; ++n) gx[t * kHop + n] += window[n] * ra[n];
          }
          if (use_b) {
            for (std::size_t n = 0; n < kWindow; ++n) gx[(t + 1) * kHop + n] += window[n] * rb[n];
          }
        }
      });
}

}  // namespace mixtts::dsp
