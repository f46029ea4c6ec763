// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
//
// Waveform <-> log-mel features: STFT, mel filterbank, log compression and
// per-dimension normalization. The log-mel transform is also exposed as an
// autodiff operation for optimization-based inversion.
#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixtts/matrix.hpp"
#include "mixtts/nn/tensor.hpp"

namespace mixtts::dsp {

inline constexpr int kSampleRate = 22050;
inline constexpr std::size_t kWindow = 512;
inline constexpr std::size_t kHop = 128;
inline constexpr std::size_t kBins = kWindow / 2 + 1;
inline constexpr std::size_t kMels = 80;
inline constexpr double kMelLow = 125.0;
inline constexpr double kMelHigh = 7800.0;
inline constexpr double kLogFloor = 1e-5;

struct Waveform {
  std::vector<double> samples;
  int sample_rate = kSampleRate;

  double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
};

using Complex = std::complex<double>;

/// In-place radix-2 FFT, size a power of two. `inverse` uses e^{+i} and does
/// not divide by n.
void fft(std::span<Complex> data, bool inverse);

/// Half spectra (n/2 + 1 bins) of two real length-n signals from one complex
/// FFT. `b` may be empty, in which case `out_b` is untouched.
void rfft_pair(std::span<const double> a, std::span<const double> b, std::span<Complex> out_a,
               std::span<Complex> out_b);
/// Unnormalized inverse of two Hermitian spectra given as half spectra; the
/// imaginary parts of the DC and Nyquist bins are ignored. `b` may be empty.
void irfft_pair(std::span<const Complex> a, std::span<const Complex> b, std::span<double> out_a,
                std::span<double> out_b);

/// Periodic Hann window of length n.
std::vector<double> hann_window(std::size_t n = kWindow);

/// 1 + floor((length - window) / hop); 0 when length < window.
std::size_t frame_count(std::size_t length);
/// window + (frames - 1) * hop.
std::size_t signal_length(std::size_t frames);

/// Complex STFT, [frames x kBins] row-major. Throws TooShort.
struct Spectrogram {
  std::size_t frames = 0;
  std::vector<Complex> bins;

  Complex& at(std::size_t t, std::size_t k) { return bins[t * kBins + k]; }
  Complex at(std::size_t t, std::size_t k) const { return bins[t * kBins + k]; }
  Matrix magnitude() const;
};

Spectrogram stft(std::span<const double> samples);
Matrix stft_mag(std::span<const double> samples);

/// Least-squares overlap-add inverse: each frame is inverse transformed,
/// windowed, summed and divided by the summed squared window.
std::vector<double> istft(const Spectrogram& spec);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Unit-peak triangular filters with centers uniform on the mel scale.
/// Throws BadRange unless 0 <= f_lo < f_hi <= sr / 2.
Matrix mel_matrix(std::size_t n_mels = kMels, double f_lo = kMelLow, double f_hi = kMelHigh,
                  std::size_t n_fft = kWindow, int sample_rate = kSampleRate);

/// Shared default filterbank with each row's nonzero support.
struct MelBank {
  Matrix weights;  // [n_mels x kBins]
  std::vector<std::size_t> begin, end;

  static const MelBank& standard();
  explicit MelBank(Matrix w);
};

struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;
};

struct MelSpectrogram {
  Matrix frames;  // [N x kMels]
  bool normalized = false;
  std::optional<NormStats> stats;
};

/// log(max(mel . |STFT|, floor)) on raw magnitudes.
Matrix logmel_from_magnitude(const Matrix& magnitude);
/// Throws TooShort. With `normalize`, stats are required.
MelSpectrogram logmel(const Waveform& w, bool normalize = false,
                      const std::optional<NormStats>& stats = std::nullopt);

/// Per-dimension mean and std over all frames of all inputs. Dimensions with
/// std below 1e-8 get std 1.
NormStats compute_stats(std::span<const Matrix> features);
MelSpectrogram normalize(const MelSpectrogram& m, const NormStats& stats);
MelSpectrogram denormalize(const MelSpectrogram& m);

/// Log-mel of a [1 x L] waveform tensor as an autodiff op, [N x kMels].
nn::Tensor logmel_tensor(const nn::Tensor& samples);

/// Binary feature file: magic "MIXMEL01", u32 rows, u32 cols, then
/// little-endian doubles row by row.
std::string encode_mel(const Matrix& frames);
Matrix decode_mel(std::string_view bytes);
void save_mel(const std::filesystem::path& path, const Matrix& frames);
Matrix load_mel(const std::filesystem::path& path);

/// PCM 16-bit mono at 22050 Hz only; samples scaled to [-1, 1).
Waveform read_wav(const std::filesystem::path& path);
/// Scales by 32768, rounds, clips to the int16 range and writes PCM 16-bit mono.
void write_wav(const std::filesystem::path& path, const Waveform& w);

}  // namespace mixtts::dsp
