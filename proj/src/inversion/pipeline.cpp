// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <algorithm>
#include <chrono>

#include "mixtts/inversion.hpp"

namespace mixtts::inversion {

Method parse_method(const std::string& name) {
  if (name == "lbfgs") return Method::kLbfgs;
  if (name == "griffin_lim") return Method::kGriffinLim;
  if (name == "lbfgs_then_gl") return Method::kLbfgsThenGl;
  throw ConfigError("unknown inversion method '" + name +
                    "' (expected lbfgs, griffin_lim or lbfgs_then_gl)");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::kLbfgs: return "lbfgs";
    case Method::kGriffinLim: return "griffin_lim";
    case Method::kLbfgsThenGl: return "lbfgs_then_gl";
  }
  return "?";
}

std::string label(const InversionConfig& config) {
  switch (config.method) {
    case Method::kLbfgs: return std::to_string(config.lbfgs_iters) + " L-BFGS";
    case Method::kGriffinLim: return "Modified Griffin-Lim";
    case Method::kLbfgsThenGl: return std::to_string(config.lbfgs_iters) + " L + GL";
  }
  return "?";
}

namespace {

void clip(std::vector<double>& w) {
  for (auto& v : w) v = std::clamp(v, -1.0, 1.0);
}

/// Flat unit magnitude inside the filterbank support, zero outside.
Matrix flat_reference(std::size_t frames) {
  const auto& bank = dsp::MelBank::standard();
  std::size_t lo = dsp::kBins, hi = 0;
  for (std::size_t b = 0; b < dsp::kMels; ++b) {
    lo = std::min(lo, bank.begin[b]);
    hi = std::max(hi, bank.end[b]);
  }
  Matrix ref(frames, dsp::kBins);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = lo; k < hi; ++k) ref(t, k) = 1.0;
  }
  return ref;
}

}  // namespace

PipelineResult invert_pipeline(const Matrix& target, const InversionConfig& config) {
  LbfgsInversion stage1 = lbfgs_invert(target, config.lbfgs_iters, config);
  const Matrix magnitude =
      mel_corrected_magnitude(target, dsp::stft_mag(stage1.waveform.samples));
  GriffinLimResult stage2 =
      griffin_lim(magnitude, config.gl_iters, PhaseInit::from_waveform(stage1.waveform.samples));
  clip(stage2.waveform.samples);
  return {std::move(stage1.waveform), std::move(stage2.waveform), std::move(stage1.trace)};
}

dsp::Waveform invert(const Matrix& target, const InversionConfig& config) {
  if (target.rows() == 0) throw TooShort("log-mel target has no frames");
  switch (config.method) {
    case Method::kLbfgs:
      return lbfgs_invert(target, config.lbfgs_iters, config).waveform;
    case Method::kGriffinLim: {
      const Matrix magnitude = mel_corrected_magnitude(target, flat_reference(target.rows()));
      auto gl = griffin_lim(magnitude, config.gl_iters, PhaseInit::random(config.seed));
      clip(gl.waveform.samples);
      return std::move(gl.waveform);
    }
    case Method::kLbfgsThenGl:
      return invert_pipeline(target, config).output;
  }
  throw ConfigError("unhandled inversion method");
}

double logmel_mse(const dsp::Waveform& w, const Matrix& target) {
  const Matrix mel = dsp::logmel_from_magnitude(dsp::stft_mag(w.samples));
  const std::size_t frames = std::min(mel.rows(), target.rows());
  if (frames == 0) throw TooShort("logmel_mse: no overlapping frames");
  double acc = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t b = 0; b < dsp::kMels; ++b) {
      const double d = mel(t, b) - target(t, b);
      acc += d * d;
    }
  }
  return acc / static_cast<double>(frames * dsp::kMels);
}

BenchReport make_report(std::string label, double wall_time, std::size_t samples) {
  BenchReport r;
  r.label = std::move(label);
  r.wall_time = wall_time;
  r.seconds_per_sample = wall_time / static_cast<double>(samples);
  r.strtf = strtf_from_seconds_per_sample(r.seconds_per_sample);
  r.audio_seconds = static_cast<double>(samples) / dsp::kSampleRate;
  return r;
}

std::vector<InversionConfig> reference_methods(std::uint64_t seed) {
  return {
      {Method::kLbfgs, 100, 100, 10, seed},
      {Method::kGriffinLim, 100, 100, 10, seed},
      {Method::kLbfgsThenGl, 100, 100, 10, seed},
      {Method::kLbfgs, 1000, 100, 10, seed},
      {Method::kLbfgsThenGl, 1000, 100, 10, seed},
  };
}

std::vector<BenchReport> bench_strtf(const std::vector<InversionConfig>& methods,
                                     const std::vector<dsp::Waveform>& fixture, std::size_t runs) {
  if (fixture.empty()) throw EmptyCorpus();
  std::vector<Matrix> targets;
  std::size_t samples = 0;
  for (const auto& w : fixture) {
    targets.push_back(dsp::logmel(w).frames);
    samples += dsp::signal_length(targets.back().rows());
  }
  for (const auto& config : methods) invert(targets.front(), config);  // warm caches
  // Methods take turns clip by clip so slow drift on the machine is shared.
  const std::size_t n_runs = std::max<std::size_t>(runs, 1);
  std::vector<std::vector<double>> times(methods.size(), std::vector<double>(n_runs, 0.0));
  for (std::size_t r = 0; r < n_runs; ++r) {
    for (const auto& t : targets) {
      for (std::size_t m = 0; m < methods.size(); ++m) {
        const auto start = std::chrono::steady_clock::now();
        invert(t, methods[m]);
        times[m][r] +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      }
    }
  }
  std::vector<BenchReport> reports;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    std::sort(times[m].begin(), times[m].end());
    reports.push_back(make_report(label(methods[m]), times[m][times[m].size() / 2], samples));
  }
  return reports;
}

}  // namespace mixtts::inversion
