// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <cmath>
#include <cstdint>
#include <numbers>

#include "mixtts/dsp.hpp"

namespace mixtts::dsp {

namespace {

bool is_power_of_two(std::size_t n) { return n && !(n & (n - 1)); }

struct Twiddles {
  std::size_t n = 0;
  // Stage with butterfly span len stores e^{-2 pi i k / len}, k < len / 2,
  // starting at offset len / 2 - 1, as interleaved (re, im).
  std::vector<double> w;
  std::vector<std::uint32_t> swaps;  // bit-reversal pairs (i, j), i < j
};

const Twiddles& twiddles(std::size_t n) {
  thread_local Twiddles cache;
  if (cache.n != n) {
    cache.n = n;
    cache.w.assign(2 * n, 0.0);
    for (std::size_t len = 2; len <= n; len <<= 1) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
        cache.w[2 * (len / 2 - 1 + k)] = std::cos(a);
        cache.w[2 * (len / 2 - 1 + k) + 1] = std::sin(a);
      }
    }
    cache.swaps.clear();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) {
        cache.swaps.push_back(static_cast<std::uint32_t>(i));
        cache.swaps.push_back(static_cast<std::uint32_t>(j));
      }
    }
  }
  return cache;
}

}  // namespace

void fft(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw ShapeMismatch("fft: size must be a power of two");
  const auto& tw = twiddles(n);
  for (std::size_t p = 0; p < tw.swaps.size(); p += 2) std::swap(data[tw.swaps[p]], data[tw.swaps[p + 1]]);
  // Plain real arithmetic: std::complex multiplication carries NaN recovery
  // that costs more than the butterfly itself.
  auto* z = reinterpret_cast<double*>(data.data());
  const double sign = inverse ? -1.0 : 1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const double* w = tw.w.data() + 2 * (half - 1);
    for (std::size_t i = 0; i < n; i += len) {
      double* u = z + 2 * i;
      double* v = u + 2 * half;
      for (std::size_t k = 0; k < half; ++k) {
        const double wr = w[2 * k];
        const double wi = sign * w[2 * k + 1];
        const double vr = v[2 * k] * wr - v[2 * k + 1] * wi;
        const double vi = v[2 * k] * wi + v[2 * k + 1] * wr;
        v[2 * k] = u[2 * k] - vr;
        v[2 * k + 1] = u[2 * k + 1] - vi;
        u[2 * k] += vr;
        u[2 * k + 1] += vi;
      }
    }
  }
}

void rfft_pair(std::span<const double> a, std::span<const double> b, std::span<Complex> out_a,
               std::span<Complex> out_b) {
  const std::size_t n = a.size();
  thread_local std::vector<Complex> buf;
  buf.resize(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = {a[i], b.empty() ? 0.0 : b[i]};
  fft(buf, false);
  // Z = A + iB with A, B Hermitian: A_k = (Z_k + conj Z_-k) / 2, B_k = (Z_k - conj Z_-k) / 2i.
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const Complex zk = buf[k];
    const Complex zc = std::conj(buf[(n - k) % n]);
    out_a[k] = {0.5 * (zk.real() + zc.real()), 0.5 * (zk.imag() + zc.imag())};
    if (!b.empty()) out_b[k] = {0.5 * (zk.imag() - zc.imag()), -0.5 * (zk.real() - zc.real())};
  }
}

void irfft_pair(std::span<const Complex> a, std::span<const Complex> b, std::span<double> out_a,
                std::span<double> out_b) {
  const std::size_t n = out_a.size();
  thread_local std::vector<Complex> buf;
  buf.resize(n);
  auto half = [](std::span<const Complex> s, std::size_t k, std::size_t n) {
    if (s.empty()) return Complex{};
    if (k == 0 || k == n / 2) return Complex{s[k].real(), 0.0};
    return k < n / 2 ? s[k] : std::conj(s[n - k]);
  };
  for (std::size_t k = 0; k < n; ++k) {
    const Complex x = half(a, k, n);
    const Complex y = half(b, k, n);
    buf[k] = {x.real() - y.imag(), x.imag() + y.real()};
  }
  fft(buf, true);
  for (std::size_t i = 0; i < n; ++i) {
    out_a[i] = buf[i].real();
    if (!b.empty()) out_b[i] = buf[i].imag();
  }
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

std::size_t frame_count(std::size_t length) {
  return length < kWindow ? 0 : 1 + (length - kWindow) / kHop;
}

std::size_t signal_length(std::size_t frames) {
  return frames == 0 ? 0 : kWindow + (frames - 1) * kHop;
}

Matrix Spectrogram::magnitude() const {
  Matrix m(frames, kBins);
  for (std::size_t i = 0; i < bins.size(); ++i) m.data()[i] = std::abs(bins[i]);
  return m;
}

Spectrogram stft(std::span<const double> samples) {
  const std::size_t frames = frame_count(samples.size());
  if (frames == 0) {
    throw TooShort("stft needs at least " + std::to_string(kWindow) + " samples, got " +
                   std::to_string(samples.size()));
  }
  static const std::vector<double> window = hann_window();
  Spectrogram spec;
  spec.frames = frames;
  spec.bins.resize(frames * kBins);
  std::vector<double> a(kWindow), b(kWindow);
  for (std::size_t t = 0; t < frames; t += 2) {
    const bool pair = t + 1 < frames;
    const double* x = samples.data() + t * kHop;
    for (std::size_t n = 0; n < kWindow; ++n) a[n] = x[n] * window[n];
    if (pair) {
      for (std::size_t n = 0; n < kWindow; ++n) b[n] = x[kHop + n] * window[n];
    }
    rfft_pair(a, pair ? std::span<const double>(b) : std::span<const double>(),
              std::span(spec.bins).subspan(t * kBins, kBins),
              pair ? std::span(spec.bins).subspan((t + 1) * kBins, kBins) : std::span<Complex>());
  }
  return spec;
}

Matrix stft_mag(std::span<const double> samples) { return stft(samples).magnitude(); }

std::vector<double> istft(const Spectrogram& spec) {
  static const std::vector<double> window = hann_window();
  const std::size_t length = signal_length(spec.frames);
  std::vector<double> out(length, 0.0), norm(length, 0.0);
  std::vector<double> a(kWindow), b(kWindow);
  const std::span<const Complex> bins(spec.bins);
  for (std::size_t t = 0; t < spec.frames; t += 2) {
    const bool pair = t + 1 < spec.frames;
    irfft_pair(bins.subspan(t * kBins, kBins),
               pair ? bins.subspan((t + 1) * kBins, kBins) : std::span<const Complex>(), a, b);
    for (std::size_t f = 0; f < (pair ? 2u : 1u); ++f) {
      const auto& frame = f == 0 ? a : b;
      const std::size_t at = (t + f) * kHop;
      for (std::size_t n = 0; n < kWindow; ++n) {
        out[at + n] += frame[n] / static_cast<double>(kWindow) * window[n];
        norm[at + n] += window[n] * window[n];
      }
    }
  }
  for (std::size_t i = 0; i < length; ++i) {
    if (norm[i] > 1e-10) out[i] /= norm[i];
  }
  return out;
}

}  // namespace mixtts::dsp
