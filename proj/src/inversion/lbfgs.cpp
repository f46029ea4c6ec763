// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <algorithm>
#include <cmath>
#include <deque>

#include "mixtts/inversion.hpp"
#include "mixtts/nn/ops.hpp"
#include "mixtts/random.hpp"

namespace mixtts::inversion {

namespace {

// Four partial sums keep the FP dependency chain short; the summation order
// is fixed, so results stay bit-reproducible.
double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

struct Pair {
  std::vector<double> s, y;
  double rho;
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double> x0, const LbfgsOptions& opts) {
  const std::size_t n = x0.size();
  LbfgsResult r;
  r.x = std::move(x0);
  std::vector<double> g(n), g_new(n), x_new(n), d(n);
  double fx = f(r.x, g);
  ++r.evaluations;
  if (!std::isfinite(fx)) throw NonFiniteLoss("L-BFGS: non-finite initial loss");
  r.losses.push_back(fx);
  std::deque<Pair> memory;
  Pair scratch{std::vector<double>(n), std::vector<double>(n), 0.0};
  std::vector<double> alpha(opts.history);

  while (r.iterations < opts.max_iters) {
    if (std::sqrt(dot(g, g)) < opts.grad_tolerance) break;

    // Two-loop recursion: d = -H g.
    for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
    for (std::size_t j = memory.size(); j-- > 0;) {
      alpha[j] = memory[j].rho * dot(memory[j].s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[j] * memory[j].y[i];
    }
    double step = 1.0;
    if (!memory.empty()) {
      const auto& last = memory.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (auto& v : d) v *= gamma;
      for (std::size_t j = 0; j < memory.size(); ++j) {
        const double beta = memory[j].rho * dot(memory[j].y, d);
        for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[j] - beta) * memory[j].s[i];
      }
    } else {
      step = std::min(1.0, 1.0 / std::sqrt(dot(g, g)));
    }
    double slope = dot(g, d);
    if (slope >= 0.0) {
      // Not a descent direction: drop the curvature history.
      memory.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -dot(g, g);
      step = std::min(1.0, 1.0 / std::sqrt(dot(g, g)));
    }

    bool accepted = false;
    double f_new = fx;
    for (std::size_t bt = 0; bt <= opts.max_backtracks; ++bt) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = r.x[i] + step * d[i];
      f_new = f(x_new, g_new);
      ++r.evaluations;
      if (std::isfinite(f_new) && f_new <= fx + opts.armijo_c * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();  // retry once from steepest descent
        continue;
      }
      r.line_search_failed = true;
      break;
    }

    for (std::size_t i = 0; i < n; ++i) {
      scratch.s[i] = x_new[i] - r.x[i];
      scratch.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(scratch.s, scratch.y);
    if (sy > 1e-12 * std::sqrt(dot(scratch.y, scratch.y) * dot(scratch.s, scratch.s)) && sy > 0.0) {
      scratch.rho = 1.0 / sy;
      memory.push_back(std::move(scratch));
      if (memory.size() > opts.history) {
        scratch = std::move(memory.front());  // recycle the oldest buffers
        memory.pop_front();
      } else {
        scratch = Pair{std::vector<double>(n), std::vector<double>(n), 0.0};
      }
    }
    r.x.swap(x_new);
    g.swap(g_new);
    fx = f_new;
    r.losses.push_back(fx);
    ++r.iterations;
  }
  return r;
}

double logmel_objective(const Matrix& target, std::span<const double> x, std::span<double> grad) {
  const nn::Tensor samples =
      nn::Tensor::parameter({1, x.size()}, std::vector<double>(x.begin(), x.end()));
  const nn::Tensor mel = dsp::logmel_tensor(samples);
  if (mel.rows() != target.rows() || mel.cols() != target.cols()) {
    throw ShapeMismatch("logmel_objective: target has " + std::to_string(target.rows()) +
                        " frames, waveform gives " + std::to_string(mel.rows()));
  }
  const nn::Tensor loss =
      nn::mse(mel, nn::Tensor::constant({target.rows(), target.cols()}, target.data()));
  nn::backward(loss);
  const auto g = samples.grad();
  std::copy(g.begin(), g.end(), grad.begin());
  return loss.item();
}

LbfgsInversion lbfgs_invert(const Matrix& target, std::size_t iters,
                            const InversionConfig& config) {
  if (target.rows() == 0) throw TooShort("log-mel target has no frames");
  if (target.cols() != dsp::kMels) throw ShapeMismatch("lbfgs_invert: expected 80 mel bands");
  Rng rng(config.seed);
  std::vector<double> x0(dsp::signal_length(target.rows()));
  for (auto& v : x0) v = rng.normal(0.0, 1e-3);
  LbfgsOptions opts;
  opts.max_iters = iters;
  opts.history = config.history;
  LbfgsInversion out;
  out.trace = lbfgs_minimize(
      [&target](std::span<const double> x, std::span<double> g) {
        return logmel_objective(target, x, g);
      },
      std::move(x0), opts);
  out.waveform.samples = out.trace.x;
  for (auto& v : out.waveform.samples) v = std::clamp(v, -1.0, 1.0);
  return out;
}

}  // namespace mixtts::inversion
