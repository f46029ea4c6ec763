// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <doctest.h>

#include <chrono>
#include <cmath>

#include "mixtts/inversion.hpp"
#include "mixtts/synthetic.hpp"

using namespace mixtts;
using namespace mixtts::inversion;

namespace {

const dsp::Waveform& clip() {
  static const auto w = synthetic::speechlike(42, 0.3);
  return w;
}

const Matrix& target() {
  static const auto t = dsp::logmel(clip()).frames;
  return t;
}

template <typename F>
double seconds(F&& f) {
  const auto start = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

TEST_CASE("L-BFGS minimizes the Rosenbrock function") {
  const Objective rosen = [](std::span<const double> x, std::span<double> g) {
    const double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2.0 * a - 400.0 * x[0] * b;
    g[1] = 200.0 * b;
    return a * a + 100.0 * b * b;
  };
  const auto r = lbfgs_minimize(rosen, {-1.2, 1.0}, {.max_iters = 200});
  CHECK(std::abs(r.x[0] - 1.0) < 1e-6);
  CHECK(std::abs(r.x[1] - 1.0) < 1e-6);
  for (std::size_t i = 1; i < r.losses.size(); ++i) CHECK(r.losses[i] <= r.losses[i - 1]);
  CHECK(r.losses.size() == r.iterations + 1);
}

TEST_CASE("L-BFGS solves a convex quadratic") {
  const std::vector<double> d{1.0, 4.0, 9.0, 16.0, 25.0};
  const Objective quad = [&](std::span<const double> x, std::span<double> g) {
    double f = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      g[i] = d[i] * (x[i] - double(i));
      f += 0.5 * d[i] * (x[i] - double(i)) * (x[i] - double(i));
    }
    return f;
  };
  const auto r = lbfgs_minimize(quad, std::vector<double>(5, 3.0), {.max_iters = 50});
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(r.x[i] - double(i)) < 1e-6);
}

TEST_CASE("log-mel objective gradient matches finite differences") {
  std::vector<double> x(clip().samples.begin(), clip().samples.end());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.5 * x[i] + 1e-3 * std::sin(0.37 * double(i));
  std::vector<double> g(x.size()), scratch(x.size());
  logmel_objective(target(), x, g);
  for (std::size_t i : {700u, 1500u, 2222u, 4000u, 5100u}) {
    const double h = 1e-7;  // the log makes low-energy regions strongly curved
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd =
        (logmel_objective(target(), xp, scratch) - logmel_objective(target(), xm, scratch)) / (2 * h);
    CHECK(fd == doctest::Approx(g[i]).epsilon(1e-4).scale(1e-8));
  }
}

TEST_CASE("L-BFGS inversion contract") {
  InversionConfig cfg;
  cfg.seed = 3;
  const auto one = lbfgs_invert(target(), 1, cfg);
  CHECK(one.trace.iterations == 1);
  CHECK(one.waveform.samples.size() == dsp::signal_length(target().rows()));

  const auto run = lbfgs_invert(target(), 30, cfg);
  CHECK(run.trace.iterations <= 30);
  for (std::size_t i = 1; i < run.trace.losses.size(); ++i) {
    CHECK(run.trace.losses[i] <= run.trace.losses[i - 1]);
  }
  CHECK(run.trace.losses.back() < 0.5 * run.trace.losses.front());
  for (double s : run.waveform.samples) CHECK(std::abs(s) <= 1.0);

  const auto again = lbfgs_invert(target(), 30, cfg);
  CHECK(again.waveform.samples == run.waveform.samples);
  cfg.seed = 4;
  CHECK(lbfgs_invert(target(), 30, cfg).waveform.samples != run.waveform.samples);
  CHECK_THROWS_AS(lbfgs_invert(Matrix(0, dsp::kMels), 5, cfg), TooShort);
}

TEST_CASE("Griffin-Lim contract") {
  const auto& x = clip().samples;
  const Matrix mag = dsp::stft_mag(x);
  const auto fixed = griffin_lim(mag, 1, PhaseInit::from_waveform(x));
  CHECK(fixed.convergence.back() < 1e-6);

  const auto gl = griffin_lim(mag, 40, PhaseInit::random(5));
  REQUIRE(gl.convergence.size() == 40);
  for (std::size_t i = 1; i < gl.convergence.size(); ++i) {
    CHECK(gl.convergence[i] <= gl.convergence[i - 1] + 1e-12);
  }
  CHECK(gl.waveform.samples.size() == dsp::signal_length(mag.rows()));
  CHECK(griffin_lim(mag, 5, PhaseInit::random(5)).waveform.samples ==
        griffin_lim(mag, 5, PhaseInit::random(5)).waveform.samples);

  const auto zero = griffin_lim(Matrix(6, dsp::kBins), 3, PhaseInit::random(1));
  for (double s : zero.waveform.samples) CHECK(s == 0.0);
  CHECK(spectral_convergence(zero.waveform.samples, Matrix(6, dsp::kBins)) == 0.0);

  Matrix bad = mag;
  bad(2, 7) = -1e-3;
  CHECK_THROWS_AS(griffin_lim(bad, 3, PhaseInit::random(1)), BadMagnitude);
}

TEST_CASE("mel-corrected magnitude") {
  const Matrix mag = dsp::stft_mag(clip().samples);
  const Matrix same = mel_corrected_magnitude(dsp::logmel_from_magnitude(mag), mag);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    CHECK(same.data()[i] == doctest::Approx(mag.data()[i]).epsilon(1e-9));
  }
  Matrix louder = dsp::logmel_from_magnitude(mag);
  for (auto& v : louder.data()) v += std::log(2.0);
  const Matrix doubled = mel_corrected_magnitude(louder, mag);
  const auto& bank = dsp::MelBank::standard();
  for (std::size_t t = 0; t < mag.rows(); ++t) {
    for (std::size_t k = bank.begin.front(); k < bank.end.back(); ++k) {
      CHECK(doubled(t, k) == doctest::Approx(2.0 * mag(t, k)).epsilon(1e-9));
    }
    CHECK(doubled(t, 0) == mag(t, 0));
  }
}

TEST_CASE("pipeline and dispatch") {
  InversionConfig cfg{Method::kLbfgsThenGl, 20, 20, 10, 1};
  const auto p = invert_pipeline(target(), cfg);
  CHECK(p.output.samples.size() == dsp::signal_length(target().rows()));
  CHECK(p.stage1.samples.size() == p.output.samples.size());
  for (double s : p.output.samples) CHECK(std::abs(s) <= 1.0);
  CHECK(invert(target(), cfg).samples == p.output.samples);
  CHECK(logmel_mse(p.output, target()) < logmel_mse(p.stage1, target()) * 1.5);
  CHECK(logmel_mse(clip(), target()) == 0.0);

  cfg.method = Method::kGriffinLim;
  const auto gl = invert(target(), cfg);
  CHECK(gl.samples.size() == p.output.samples.size());
  CHECK_THROWS_AS(invert(Matrix(0, dsp::kMels), cfg), TooShort);
}

TEST_CASE("labels, method names and STRTF") {
  CHECK(label({Method::kLbfgsThenGl, 100, 100, 10, 0}) == "100 L + GL");
  CHECK(label({Method::kLbfgsThenGl, 1000, 100, 10, 0}) == "1000 L + GL");
  CHECK(label({Method::kLbfgs, 100, 100, 10, 0}) == "100 L-BFGS");
  CHECK(label({Method::kGriffinLim, 100, 100, 10, 0}) == "Modified Griffin-Lim");
  for (auto m : {Method::kLbfgs, Method::kGriffinLim, Method::kLbfgsThenGl}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK_THROWS_AS(parse_method("wavenet"), ConfigError);
  CHECK(strtf_from_seconds_per_sample(1e-4) == doctest::Approx(2.205));
  const auto r = make_report("x", 2.0, 44100);
  CHECK(r.audio_seconds == doctest::Approx(2.0));
  CHECK(r.strtf == doctest::Approx(1.0));
  CHECK(reference_methods().size() == 5);
  CHECK_THROWS_AS(bench_strtf(reference_methods(), {}), EmptyCorpus);
}

TEST_CASE("more iterations take longer") {
  const Matrix mag = dsp::stft_mag(synthetic::speechlike(7, 1.0).samples);
  griffin_lim(mag, 2, PhaseInit::random(1));
  const double short_run = seconds([&] { griffin_lim(mag, 10, PhaseInit::random(1)); });
  const double long_run = seconds([&] { griffin_lim(mag, 40, PhaseInit::random(1)); });
  CHECK(long_run > short_run);
}
