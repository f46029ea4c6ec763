// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <doctest.h>

#include <cmath>

#include "mixtts/encoder.hpp"
#include "mixtts/error.hpp"
#include "mixtts/nn/grad_check.hpp"
#include "mixtts/nn/ops.hpp"

using namespace mixtts;
using nn::Tensor;

namespace {

EmbeddedSequence random_input(std::size_t T, std::size_t d, Rng& rng) {
  std::vector<double> v(T * d);
  for (auto& x : v) x = rng.normal();
  return {Tensor::parameter({T, d}, v)};
}

void fill(Tensor t, double v) {
  for (auto& x : t.mutable_value()) x = v;
}

double sigmoid_s(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Scalar LSTM over rows of x (rows in the given order).
std::vector<std::vector<double>> scalar_lstm(const Tensor& x, const nn::LstmParams& p,
                                             const std::vector<std::size_t>& order) {
  const std::size_t H = p.hidden(), I = p.input();
  std::vector<double> h(H, 0.0), c(H, 0.0);
  std::vector<std::vector<double>> out(x.rows());
  for (std::size_t t : order) {
    std::vector<double> nh(H), nc(H);
    for (std::size_t u = 0; u < H; ++u) {
      double pre[4];
      for (int g = 0; g < 4; ++g) {
        const std::size_t col = g * H + u;
        double a = p.bias.at(0, col);
        for (std::size_t i = 0; i < I; ++i) a += x.at(t, i) * p.weight.at(i, col);
        for (std::size_t j = 0; j < H; ++j) a += h[j] * p.weight.at(I + j, col);
        pre[g] = a;
      }
      nc[u] = sigmoid_s(pre[1]) * c[u] + sigmoid_s(pre[0]) * std::tanh(pre[2]);
      nh[u] = sigmoid_s(pre[3]) * std::tanh(nc[u]);
    }
    h = nh, c = nc;
    out[t] = h;
  }
  return out;
}

}  // namespace

TEST_CASE("shapes at the reference configuration") {
  Rng rng(1);
  auto params = EncoderParams::init(15, 3, 128, {1, 3, 5}, 128, 0.075, rng);
  CHECK(params.channels() == 384);
  CHECK(params.memory_dim() == 256);
  const auto x = random_input(5, 15, rng);
  CHECK(smrc_forward(x, params, nn::Mode::kEval).shape() == nn::Shape{5, 384});
  CHECK(encode(random_input(7, 15, rng), params, nn::Mode::kEval).memory.shape() ==
        nn::Shape{7, 256});
  CHECK_THROWS_AS(smrc_forward(random_input(5, 14, rng), params, nn::Mode::kEval), ShapeMismatch);
}

TEST_CASE("zero input with zero biases gives zero output") {
  Rng rng(2);
  auto params = EncoderParams::init(15, 3, 8, {1, 3, 5}, 4, 0.075, rng);
  fill(params.input_projection.bias, 0.0);
  for (auto& s : params.stacks) {
    for (auto& b : s.branch_biases) fill(b, 0.0);
  }
  const EmbeddedSequence zero{Tensor::constant({6, 15}, std::vector<double>(90, 0.0))};
  const Tensor y = smrc_forward(zero, params, nn::Mode::kEval);
  for (double v : y.value()) CHECK(v == 0.0);
}

TEST_CASE("delta filters reproduce shifted copies through one stack") {
  Rng rng(3);
  const std::size_t bc = 2, C = 6, T = 7;
  auto params = EncoderParams::init(4, 1, bc, {1, 3, 5}, 2, 0.075, rng);
  auto& stack = params.stacks[0];
  // Branch b, output channel j reads input channel b*bc + j at offset shift[b].
  const int shift[3] = {0, -1, 2};
  for (std::size_t b = 0; b < 3; ++b) {
    const std::size_t k = params.kernels[b];
    fill(stack.branch_weights[b], 0.0);
    fill(stack.branch_biases[b], 0.0);
    auto w = stack.branch_weights[b];
    for (std::size_t j = 0; j < bc; ++j) {
      const std::size_t tap = static_cast<std::size_t>(int(k / 2) + shift[b]);
      w.mutable_value()[(tap * C + b * bc + j) * bc + j] = 1.0;
    }
  }
  Rng in(4);
  std::vector<double> v(T * C);
  for (auto& e : v) e = in.normal();
  const Tensor x = Tensor::constant({T, C}, v);
  const Tensor y = smrc_stack_forward(x, stack, params.kernels, nn::Mode::kEval);
  const double norm = 1.0 / std::sqrt(1.0 + nn::kBatchNormEpsilon);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t b = 0; b < 3; ++b) {
      for (std::size_t j = 0; j < bc; ++j) {
        const long src = long(t) + shift[b];
        const double branch = (src < 0 || src >= long(T)) ? 0.0 : x.at(src, b * bc + j);
        const std::size_t ch = b * bc + j;
        const double want = x.at(t, ch) + std::max(0.0, branch * norm);
        CHECK(y.at(t, ch) == doctest::Approx(want).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("output length always equals input length") {
  Rng rng(5);
  auto params = EncoderParams::init(15, 2, 4, {1, 3, 5}, 3, 0.075, rng);
  for (std::size_t T : {1u, 2u, 3u, 9u}) {
    CHECK(encode(random_input(T, 15, rng), params, nn::Mode::kEval).length() == T);
  }
}

TEST_CASE("bidirectional symmetry") {
  Rng rng(6);
  const auto f = nn::lstm_init(5, 3, 0.3, rng), b = nn::lstm_init(5, 3, 0.3, rng);
  std::vector<double> v(6 * 5);
  for (auto& e : v) e = rng.normal();
  const Tensor x = Tensor::constant({6, 5}, v);
  const Tensor m = bidirectional_lstm(x, f, b);
  const Tensor r = bidirectional_lstm(nn::reverse_rows(x), b, f);
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t u = 0; u < 3; ++u) {
      CHECK(r.at(5 - t, u) == doctest::Approx(m.at(t, 3 + u)).epsilon(1e-14));
      CHECK(r.at(5 - t, 3 + u) == doctest::Approx(m.at(t, u)).epsilon(1e-14));
    }
  }
}

TEST_CASE("two units per direction match a hand-stepped oracle") {
  Rng rng(7);
  auto params = EncoderParams::init(15, 1, 2, {1, 3, 5}, 2, 0.3, rng);
  const auto x = random_input(5, 15, rng);
  const Tensor smrc = smrc_forward(x, params, nn::Mode::kEval);
  const Tensor memory = encode(x, params, nn::Mode::kEval).memory;
  const auto fw = scalar_lstm(smrc, params.forward, {0, 1, 2, 3, 4});
  const auto bw = scalar_lstm(smrc, params.backward, {4, 3, 2, 1, 0});
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t u = 0; u < 2; ++u) {
      CHECK(std::abs(memory.at(t, u) - fw[t][u]) < 1e-12);
      CHECK(std::abs(memory.at(t, 2 + u) - bw[t][u]) < 1e-12);
    }
  }
}

TEST_CASE("gradient reaches every kernel scale") {
  Rng rng(8);
  auto params = EncoderParams::init(15, 2, 4, {1, 3, 5}, 3, 0.3, rng);
  const auto x = random_input(6, 15, rng);
  nn::backward(nn::sum(nn::mul(encode(x, params, nn::Mode::kTrain).memory,
                               encode(x, params, nn::Mode::kEval).memory.detach())));
  for (const auto& stack : params.stacks) {
    for (const auto& w : stack.branch_weights) {
      double n = 0;
      for (double g : w.grad()) n += g * g;
      CHECK(n > 0.0);
    }
  }
}

TEST_CASE("smrc and encode pass grad_check over 20 seeds") {
  double worst_smrc = 0.0, worst_enc = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    auto params = EncoderParams::init(3, 2, 2, {1, 3, 5}, 2, 0.3, rng);
    const std::size_t T = 2 + seed % 8;
    auto x = random_input(T, 3, rng);
    std::vector<Tensor> all = {x.vectors, params.input_projection.weight,
                               params.input_projection.bias, params.forward.weight,
                               params.backward.bias};
    for (auto& s : params.stacks) {
      for (auto& w : s.branch_weights) all.push_back(w);
      all.push_back(s.gamma);
      all.push_back(s.beta);
    }
    Rng proj(seed + 1000);
    std::vector<double> pv(T * 6);
    for (auto& e : pv) e = proj.normal();
    const Tensor p6 = Tensor::constant({T, 6}, pv);
    std::vector<double> qv(T * 4);
    for (auto& e : qv) e = proj.normal();
    const Tensor p4 = Tensor::constant({T, 4}, qv);
    const nn::GradCheckOptions opts{1e-5, 12, seed};
    worst_smrc = std::max(worst_smrc, nn::grad_check(
        [&] {
          auto copy = params;  // running stats must not drift between probes
          for (auto& s : copy.stacks) s.stats = nn::RunningStats::identity(6);
          return nn::sum(nn::mul(smrc_forward(x, copy, nn::Mode::kTrain), p6));
        },
        all, opts));
    worst_enc = std::max(worst_enc, nn::grad_check(
        [&] {
          auto copy = params;
          for (auto& s : copy.stacks) s.stats = nn::RunningStats::identity(6);
          return nn::sum(nn::mul(encode(x, copy, nn::Mode::kTrain).memory, p4));
        },
        all, opts));
  }
  CHECK(worst_smrc < 1e-4);
  CHECK(worst_enc < 1e-4);
}
