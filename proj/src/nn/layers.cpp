// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include "mixtts/nn/layers.hpp"

#include <cmath>

namespace mixtts::nn {

RunningStats RunningStats::identity(std::size_t features) {
  return {Tensor::zeros({1, features}), Tensor::constant({1, features},
                                                         std::vector<double>(features, 1.0))};
}

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, RunningStats& stats,
                  Mode mode) {
  const std::size_t n = x.rows(), c = x.cols();
  if (gamma.cols() != c || beta.cols() != c || stats.mean.cols() != c) {
    throw ShapeMismatch("batch_norm: feature count");
  }
  const auto xv = x.value();
  std::vector<double> mu(c, 0.0), inv_std(c, 0.0);
  if (mode == Mode::kTrain) {
    if (n < 2) throw DegenerateBatch();
    std::vector<double> var(c, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < c; ++j) mu[j] += xv[i * c + j];
    }
    for (auto& m : mu) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const double d = xv[i * c + j] - mu[j];
        var[j] += d * d;
      }
    }
    auto rm = stats.mean.mutable_value();
    auto rv = stats.var.mutable_value();
    for (std::size_t j = 0; j < c; ++j) {
      var[j] /= static_cast<double>(n);
      inv_std[j] = 1.0 / std::sqrt(var[j] + kBatchNormEpsilon);
      rm[j] = kBatchNormMomentum * rm[j] + (1.0 - kBatchNormMomentum) * mu[j];
      rv[j] = kBatchNormMomentum * rv[j] + (1.0 - kBatchNormMomentum) * var[j];
    }
  } else {
    const auto rm = stats.mean.value();
    const auto rv = stats.var.value();
    for (std::size_t j = 0; j < c; ++j) {
      mu[j] = rm[j];
      inv_std[j] = 1.0 / std::sqrt(rv[j] + kBatchNormEpsilon);
    }
  }

  std::vector<double> xhat(n * c), out(n * c);
  const auto g = gamma.value();
  const auto b = beta.value();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      xhat[i * c + j] = (xv[i * c + j] - mu[j]) * inv_std[j];
      out[i * c + j] = g[j] * xhat[i * c + j] + b[j];
    }
  }
  const bool batch_stats = mode == Mode::kTrain;
  return Tensor::from_op(
      {n, c}, std::move(out), {x, gamma, beta},
      [n, c, xhat = std::move(xhat), inv_std = std::move(inv_std), batch_stats](detail::Node& self) {
        const double* gy = self.grad.data();
        const double* gam = self.parents[1]->value.data();
        if (self.parents[1]->requires_grad || self.parents[2]->requires_grad) {
          double* gg = self.parents[1]->requires_grad ? self.parents[1]->grad.data() : nullptr;
          double* gb = self.parents[2]->requires_grad ? self.parents[2]->grad.data() : nullptr;
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
              if (gg) gg[j] += gy[i * c + j] * xhat[i * c + j];
              if (gb) gb[j] += gy[i * c + j];
            }
          }
        }
        if (!self.parents[0]->requires_grad) return;
        double* gx = self.parents[0]->grad.data();
        if (!batch_stats) {
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += gy[i * c + j] * gam[j] * inv_std[j];
          }
          return;
        }
        // dx = gamma * inv_std / N * (N*gy - sum(gy) - xhat * sum(gy*xhat))
        std::vector<double> sum_g(c, 0.0), sum_gx(c, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < c; ++j) {
            sum_g[j] += gy[i * c + j];
            sum_gx[j] += gy[i * c + j] * xhat[i * c + j];
          }
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < c; ++j) {
            gx[i * c + j] += gam[j] * inv_std[j] * inv_n *
                             (static_cast<double>(n) * gy[i * c + j] - sum_g[j] -
                              xhat[i * c + j] * sum_gx[j]);
          }
        }
      });
}

LstmCellState LstmCellState::zeros(std::size_t batch, std::size_t hidden) {
  return {Tensor::zeros({batch, hidden}), Tensor::zeros({batch, hidden})};
}

std::pair<Tensor, LstmCellState> lstm_step(const Tensor& x, const LstmCellState& state,
                                           const LstmParams& params, double cell_keep_prob,
                                           Rng& rng, bool active) {
  const std::size_t hidden = params.hidden();
  if (x.cols() + hidden != params.weight.rows() || state.h.cols() != hidden ||
      state.c.cols() != hidden || state.h.rows() != x.rows()) {
    throw ShapeMismatch("lstm_step: input " + to_string(x.shape()) + ", state " +
                        to_string(state.h.shape()) + ", weight " +
                        to_string(params.weight.shape()));
  }
  const Tensor gates = linear(concat_cols({x, state.h}), params.weight, params.bias);
  const Tensor in_gate = sigmoid(slice_cols(gates, 0, hidden));
  const Tensor forget_gate = sigmoid(slice_cols(gates, hidden, hidden));
  Tensor candidate = tanh(slice_cols(gates, 2 * hidden, hidden));
  const Tensor out_gate = sigmoid(slice_cols(gates, 3 * hidden, hidden));
  candidate = dropout(candidate, cell_keep_prob, rng, active);
  const Tensor c = add(mul(forget_gate, state.c), mul(in_gate, candidate));
  const Tensor h = mul(out_gate, tanh(c));
  return {h, LstmCellState{h, c}};
}

std::vector<double> truncated_normal(std::size_t count, double stddev, Rng& rng) {
  std::vector<double> out(count);
  for (auto& v : out) {
    double z;
    do {
      z = rng.normal();
    } while (std::abs(z) > 2.0);
    v = z * stddev;
  }
  return out;
}

std::vector<double> orthonormal(std::size_t rows, std::size_t cols, Rng& rng) {
  // Modified Gram-Schmidt over the shorter dimension of a Gaussian matrix.
  const bool tall = rows >= cols;
  const std::size_t vec_len = tall ? rows : cols;
  const std::size_t vec_count = tall ? cols : rows;
  std::vector<std::vector<double>> basis;
  basis.reserve(vec_count);
  while (basis.size() < vec_count) {
    std::vector<double> v(vec_len);
    for (auto& e : v) e = rng.normal();
    for (const auto& b : basis) {
      double dot = 0.0;
      for (std::size_t i = 0; i < vec_len; ++i) dot += v[i] * b[i];
      for (std::size_t i = 0; i < vec_len; ++i) v[i] -= dot * b[i];
    }
    double norm = 0.0;
    for (double e : v) norm += e * e;
    norm = std::sqrt(norm);
    if (norm < 1e-8) continue;
    for (auto& e : v) e /= norm;
    basis.push_back(std::move(v));
  }
  std::vector<double> out(rows * cols);
  for (std::size_t k = 0; k < vec_count; ++k) {
    for (std::size_t i = 0; i < vec_len; ++i) {
      if (tall) {
        out[i * cols + k] = basis[k][i];
      } else {
        out[k * cols + i] = basis[k][i];
      }
    }
  }
  return out;
}

}  // namespace mixtts::nn
