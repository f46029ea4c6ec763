// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
//
// Log-mel to waveform conversion: L-BFGS over raw samples, magnitude
// substitution Griffin-Lim with seedable phase, and the two-stage pipeline
// that warm-starts Griffin-Lim from the L-BFGS result.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixtts/dsp.hpp"
#include "mixtts/matrix.hpp"

namespace mixtts::inversion {

enum class Method { kLbfgs, kGriffinLim, kLbfgsThenGl };

struct InversionConfig {
  Method method = Method::kLbfgsThenGl;
  std::size_t lbfgs_iters = 100;
  std::size_t gl_iters = 100;
  std::size_t history = 10;
  std::uint64_t seed = 0;
};

/// "lbfgs", "griffin_lim" or "lbfgs_then_gl". Throws ConfigError.
Method parse_method(const std::string& name);
std::string method_name(Method m);
/// Table label, e.g. "100 L-BFGS", "Modified Griffin-Lim", "1000 L + GL".
std::string label(const InversionConfig& config);

// L-BFGS -------------------------------------------------------------------

/// Returns f(x) and writes df/dx into grad.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsOptions {
  std::size_t max_iters = 100;
  std::size_t history = 10;
  double armijo_c = 1e-4;
  double grad_tolerance = 1e-9;
  std::size_t max_backtracks = 40;
};

struct LbfgsResult {
  std::vector<double> x;
  std::vector<double> losses;  // losses[0] at the start, then one per accepted step
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool line_search_failed = false;
};

/// Two-loop recursion with backtracking Armijo line search. On line-search
/// failure the best point so far is returned with the flag set.
LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double> x0, const LbfgsOptions& opts);

/// Mean squared error between logmel(x) and the target, with gradient.
double logmel_objective(const Matrix& target, std::span<const double> x, std::span<double> grad);

struct LbfgsInversion {
  dsp::Waveform waveform;
  LbfgsResult trace;
};

/// Samples initialized N(0, 1e-3) from config.seed, optimized against a raw
/// log-mel target, output clipped to [-1, 1]. Throws TooShort, NonFiniteLoss.
LbfgsInversion lbfgs_invert(const Matrix& target, std::size_t iters, const InversionConfig& config);

// Griffin-Lim --------------------------------------------------------------

struct PhaseInit {
  std::optional<std::vector<double>> waveform;  // phases of its STFT
  std::uint64_t seed = 0;                       // uniform random phases otherwise

  static PhaseInit random(std::uint64_t seed) { return {std::nullopt, seed}; }
  static PhaseInit from_waveform(std::vector<double> w) { return {std::move(w), 0}; }
};

struct GriffinLimResult {
  dsp::Waveform waveform;
  std::vector<double> convergence;  // spectral convergence of each iterate
};

/// || |STFT(w)| - target ||_F / ||target||_F (0 for an all-zero target).
double spectral_convergence(std::span<const double> w, const Matrix& target);

/// Throws BadMagnitude for negative entries.
GriffinLimResult griffin_lim(const Matrix& magnitude, std::size_t iters, const PhaseInit& init);

/// Rescales `reference` per bin so its mel projection matches exp(target):
/// gain_k = sum_b M[b,k] r_b / sum_b M[b,k] with r_b = exp(target_b) / mel_b.
/// Bins outside every filter keep the reference value.
Matrix mel_corrected_magnitude(const Matrix& target, const Matrix& reference);

// Pipeline -----------------------------------------------------------------

struct PipelineResult {
  dsp::Waveform stage1;
  dsp::Waveform output;
  LbfgsResult lbfgs;
};

/// L-BFGS, then Griffin-Lim on the mel-corrected stage-1 magnitudes seeded
/// with stage-1 phases.
PipelineResult invert_pipeline(const Matrix& target, const InversionConfig& config);

/// Dispatches on config.method. Target is raw log-mel [N x 80].
dsp::Waveform invert(const Matrix& target, const InversionConfig& config);

/// Mean squared log-mel difference; compares the overlapping frames.
double logmel_mse(const dsp::Waveform& w, const Matrix& target);

// Benchmark ----------------------------------------------------------------

struct BenchReport {
  std::string label;
  double seconds_per_sample = 0.0;
  double strtf = 0.0;
  double audio_seconds = 0.0;
  double wall_time = 0.0;
};

inline double strtf_from_seconds_per_sample(double s) { return s * dsp::kSampleRate; }
BenchReport make_report(std::string label, double wall_time, std::size_t samples);

/// The five table configurations, cheapest first by the reference ordering.
std::vector<InversionConfig> reference_methods(std::uint64_t seed = 0);

/// Median over `runs` of the wall time to invert every fixture clip.
/// Throws EmptyCorpus for an empty fixture.
std::vector<BenchReport> bench_strtf(const std::vector<InversionConfig>& methods,
                                     const std::vector<dsp::Waveform>& fixture,
                                     std::size_t runs = 3);

}  // namespace mixtts::inversion
