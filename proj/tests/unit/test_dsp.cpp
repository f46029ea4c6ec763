// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "mixtts/dsp.hpp"
#include "mixtts/nn/grad_check.hpp"
#include "mixtts/nn/ops.hpp"
#include "mixtts/random.hpp"
#include "test_util.hpp"

using namespace mixtts;
using namespace mixtts::dsp;
using std::numbers::pi;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed, double sd = 0.3) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal(0.0, sd);
  return v;
}

std::vector<Complex> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    Complex acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) acc += x[t] * std::polar(1.0, -2.0 * pi * double(k * t % n) / n);
    out[k] = acc;
  }
  return out;
}

// Natural-log form of the mel scale, used as an independent reference.
double mel_ref(double hz) { return 1127.0 * std::log1p(hz / 700.0); }
double hz_ref(double mel) { return 700.0 * std::expm1(mel / 1127.0); }

std::string wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                      std::uint16_t bits, std::size_t samples) {
  std::string b;
  auto u32 = [&](std::uint32_t v) { b.append(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [&](std::uint16_t v) { b.append(reinterpret_cast<const char*>(&v), 2); };
  const std::uint32_t data = static_cast<std::uint32_t>(samples * channels * bits / 8);
  b += "RIFF";
  u32(36 + data);
  b += "WAVEfmt ";
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(bits);
  b += "data";
  u32(data);
  b.append(data, '\0');
  return b;
}

}  // namespace

TEST_CASE("STFT of silence and frame counting") {
  const auto mag = stft_mag(std::vector<double>(2048, 0.0));
  CHECK(mag.rows() == frame_count(2048));
  for (double v : mag.data()) CHECK(v == 0.0);
  CHECK(frame_count(640) == 2);
  CHECK(stft_mag(std::vector<double>(640, 0.1)).rows() == 2);
  CHECK(frame_count(511) == 0);
  CHECK_THROWS_AS(stft(std::vector<double>(511, 0.0)), TooShort);

  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const std::size_t len = 512 + rng.index(5000);
    const std::size_t n = frame_count(len);
    CHECK(signal_length(n) <= len);
    CHECK(len < signal_length(n) + kHop);
    if (i < 5) CHECK(stft(std::vector<double>(len, 0.0)).frames == n);
  }
}

TEST_CASE("a bin-centred sine peaks at its bin") {
  std::vector<double> x(2048);
  for (std::size_t n = 0; n < x.size(); ++n) x[n] = std::sin(2.0 * pi * 50.0 * double(n) / 512.0);
  const auto mag = stft_mag(x);
  for (std::size_t t = 0; t < mag.rows(); ++t) {
    CHECK(mag(t, 50) == doctest::Approx(128.0).epsilon(1e-12));
    CHECK(mag(t, 49) == doctest::Approx(64.0).epsilon(1e-12));
    CHECK(mag(t, 51) == doctest::Approx(64.0).epsilon(1e-12));
    for (std::size_t k = 0; k < kBins; ++k) {
      if (k < 49 || k > 51) CHECK(mag(t, k) < 1e-9);
    }
  }
}

TEST_CASE("STFT of white noise matches a direct DFT") {
  const auto x = noise(1024, 5);
  const auto spec = stft(x);
  const auto w = hann_window();
  for (std::size_t t = 0; t < spec.frames; ++t) {
    std::vector<double> frame(kWindow);
    for (std::size_t n = 0; n < kWindow; ++n) frame[n] = x[t * kHop + n] * w[n];
    const auto ref = naive_dft(frame);
    for (std::size_t k = 0; k < kBins; ++k) CHECK(std::abs(spec.at(t, k) - ref[k]) < 1e-10);
  }
}

TEST_CASE("paired real transforms match a direct DFT and invert") {
  const auto a = noise(64, 1), b = noise(64, 2);
  std::vector<Complex> fa(33), fb(33), fc(33, Complex(7.0, 7.0));
  rfft_pair(a, b, fa, fb);
  const auto ra = naive_dft(a), rb = naive_dft(b);
  for (std::size_t k = 0; k < 33; ++k) {
    CHECK(std::abs(fa[k] - ra[k]) < 1e-12);
    CHECK(std::abs(fb[k] - rb[k]) < 1e-12);
  }
  rfft_pair(a, {}, fa, fc);
  CHECK(fc[0] == Complex(7.0, 7.0));
  std::vector<double> ia(64), ib(64);
  rfft_pair(a, b, fa, fb);
  irfft_pair(fa, fb, ia, ib);
  for (std::size_t n = 0; n < 64; ++n) {
    CHECK(ia[n] == doctest::Approx(64.0 * a[n]).epsilon(1e-12));
    CHECK(ib[n] == doctest::Approx(64.0 * b[n]).epsilon(1e-12));
  }
  std::vector<Complex> odd(12);
  CHECK_THROWS_AS(fft(odd, false), ShapeMismatch);
}

TEST_CASE("inverse STFT reconstructs the covered interior") {
  const auto x = noise(4000, 8);
  const auto y = istft(stft(x));
  REQUIRE(y.size() == signal_length(frame_count(x.size())));
  for (std::size_t n = kHop; n + kHop < y.size(); ++n) CHECK(std::abs(y[n] - x[n]) < 1e-10);
}

TEST_CASE("mel filterbank layout") {
  const Matrix m = mel_matrix();
  REQUIRE(m.rows() == kMels);
  REQUIRE(m.cols() == kBins);
  const double bin_hz = double(kSampleRate) / kWindow;
  const double lo = mel_ref(kMelLow), hi = mel_ref(kMelHigh);
  std::vector<double> centers;
  for (std::size_t b = 0; b < kMels; ++b) {
    centers.push_back(hz_ref(lo + (hi - lo) * double(b + 1) / double(kMels + 1)));
  }
  for (std::size_t b = 0; b < kMels; ++b) {
    std::size_t peak = 0;
    double best = 0.0;
    for (std::size_t k = 0; k < kBins; ++k) {
      CHECK(m(b, k) >= 0.0);
      CHECK(m(b, k) <= 1.0);
      if (m(b, k) > 0.0) {
        CHECK(double(k) * bin_hz > kMelLow);
        CHECK(double(k) * bin_hz < kMelHigh);
      }
      if (m(b, k) > best) best = m(b, k), peak = k;
    }
    CAPTURE(b);
    CHECK(best > 0.0);
    CHECK(std::abs(double(peak) * bin_hz - centers[b]) <= bin_hz);
  }
  // Between the first and last centre, neighbouring triangles sum to one.
  for (std::size_t k = 0; k < kBins; ++k) {
    const double f = double(k) * bin_hz;
    if (f <= centers.front() || f >= centers.back()) continue;
    double sum = 0.0;
    for (std::size_t b = 0; b < kMels; ++b) sum += m(b, k);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(hz_to_mel(1000.0) == doctest::Approx(mel_ref(1000.0)).epsilon(1e-5));
  CHECK_THROWS_AS(mel_matrix(80, 8000.0, 100.0), BadRange);
  CHECK_THROWS_AS(mel_matrix(80, 0.0, 12000.0), BadRange);
}

TEST_CASE("log-mel floor and scaling") {
  Waveform silence{std::vector<double>(3000, 0.0)};
  const auto quiet = logmel(silence);
  for (double v : quiet.frames.data()) CHECK(v == std::log(kLogFloor));

  Waveform w{noise(3000, 9, 0.1)};
  Waveform loud = w;
  for (auto& s : loud.samples) s *= 2.0;
  const auto a = logmel(w).frames, b = logmel(loud).frames;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b.data()[i] >= a.data()[i]);
    if (a.data()[i] > std::log(kLogFloor)) {
      CHECK(b.data()[i] - a.data()[i] == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(logmel(Waveform{std::vector<double>(100, 0.0)}), TooShort);
  CHECK_THROWS_AS(logmel(w, true), DataError);
}

TEST_CASE("normalization statistics and round trip") {
  std::vector<Matrix> feats;
  Rng rng(2);
  for (int u = 0; u < 3; ++u) {
    Matrix m(40 + u, kMels);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t d = 0; d < kMels; ++d) m(i, d) = rng.normal(double(d) * 0.1, 1.0 + d % 3);
    }
    feats.push_back(m);
  }
  feats[0](0, 5) = 1.0;
  const auto stats = compute_stats(feats);
  MelSpectrogram raw{feats[1], false, std::nullopt};
  const auto norm = normalize(raw, stats);
  CHECK(norm.normalized);
  const auto back = denormalize(norm);
  for (std::size_t i = 0; i < back.frames.size(); ++i) {
    CHECK(std::abs(back.frames.data()[i] - feats[1].data()[i]) < 1e-12);
  }
  // Pooled statistics: normalizing everything gives zero mean, unit std.
  for (std::size_t d = 0; d < kMels; d += 7) {
    double s = 0, s2 = 0, n = 0;
    for (const auto& f : feats) {
      const auto z = normalize({f, false, std::nullopt}, stats).frames;
      for (std::size_t i = 0; i < z.rows(); ++i) s += z(i, d), s2 += z(i, d) * z(i, d), ++n;
    }
    CHECK(std::abs(s / n) < 1e-12);
    CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(1.0).epsilon(1e-9));
  }
  Matrix flat(4, kMels, 2.0);
  CHECK(compute_stats(std::span<const Matrix>(&flat, 1)).std[0] == 1.0);
  CHECK_THROWS_AS(normalize(norm, stats), DataError);
  CHECK_THROWS_AS(compute_stats({}), EmptyCorpus);
}

TEST_CASE("differentiable log-mel agrees with the direct path and its gradient") {
  const auto x = noise(1024, 12, 0.2);
  const auto t = nn::Tensor::parameter({1, x.size()}, x);
  const auto y = logmel_tensor(t);
  const auto ref = logmel(Waveform{x}).frames;
  REQUIRE(y.rows() == ref.rows());
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(y.value()[i] - ref.data()[i]) < 1e-12);

  Rng rng(1);
  std::vector<double> wv(ref.size());
  for (auto& v : wv) v = rng.normal();
  const auto weights = nn::Tensor::constant({ref.rows(), kMels}, wv);
  CHECK(nn::grad_check([&] { return nn::sum(nn::mul(logmel_tensor(t), weights)); }, {t},
                       {1e-6, 48, 3}) < 1e-4);
}

TEST_CASE("WAV and feature files") {
  const auto dir = mixtts::testing::fresh_dir("dsp_files");
  Waveform w{noise(1000, 4, 0.3)};
  w.samples[0] = 1.5;  // clipped on write
  write_wav(dir / "a.wav", w);
  const auto back = read_wav(dir / "a.wav");
  REQUIRE(back.samples.size() == w.samples.size());
  CHECK(back.sample_rate == kSampleRate);
  CHECK(back.samples[0] == doctest::Approx(1.0).epsilon(1e-4));
  for (std::size_t i = 1; i < w.samples.size(); ++i) {
    if (w.samples[i] >= 32767.0 / 32768.0) continue;  // saturates at the int16 maximum
    CHECK(std::abs(back.samples[i] - std::clamp(w.samples[i], -1.0, 1.0)) <= 0.5 / 32768.0 + 1e-12);
  }
  mixtts::testing::spit(dir / "stereo.wav", wav_bytes(1, 2, 22050, 16, 10));
  mixtts::testing::spit(dir / "rate.wav", wav_bytes(1, 1, 44100, 16, 10));
  mixtts::testing::spit(dir / "float.wav", wav_bytes(3, 1, 22050, 32, 10));
  mixtts::testing::spit(dir / "junk.wav", "definitely not audio");
  mixtts::testing::spit(dir / "ok.wav", wav_bytes(1, 1, 22050, 16, 10));
  CHECK(read_wav(dir / "ok.wav").samples.size() == 10);
  CHECK_THROWS_AS(read_wav(dir / "stereo.wav"), DataError);
  CHECK_THROWS_AS(read_wav(dir / "rate.wav"), DataError);
  CHECK_THROWS_AS(read_wav(dir / "float.wav"), DataError);
  CHECK_THROWS_AS(read_wav(dir / "junk.wav"), DataError);
  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), MissingFile);

  Matrix m(3, 4, std::vector<double>{1, -2, 3.5, 0, 1e-300, 7, 8, 9, 10, 11, 12, -0.25});
  CHECK(decode_mel(encode_mel(m)) == m);
  save_mel(dir / "m.mel", m);
  CHECK(load_mel(dir / "m.mel") == m);
  const auto bytes = encode_mel(m);
  CHECK_THROWS_AS(decode_mel(bytes.substr(0, bytes.size() - 1)), DataError);
  CHECK_THROWS_AS(decode_mel("XXXXXXXX" + bytes.substr(8)), DataError);
}
