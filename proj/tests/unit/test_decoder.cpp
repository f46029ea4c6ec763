// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <doctest.h>

#include <cmath>

#include "mixtts/decoder.hpp"
#include "mixtts/error.hpp"
#include "mixtts/nn/grad_check.hpp"
#include "mixtts/nn/ops.hpp"

using namespace mixtts;
using nn::Tensor;

namespace {

DecoderConfig tiny(std::size_t mels = 80) {
  DecoderConfig c;
  c.n_mels = mels;
  c.prenet_hidden = 4;
  c.attention_hidden = 4;
  c.mixtures = 2;
  c.decoder_hidden = 4;
  c.lstm_init_scale = 0.3;
  return c;
}

Tensor rand_tensor(std::size_t r, std::size_t c, Rng& rng, bool param = false, double sd = 1.0) {
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.normal(0.0, sd);
  return param ? Tensor::parameter({r, c}, v) : Tensor::constant({r, c}, v);
}

std::vector<Tensor> all_params(const DecoderParams& p) {
  std::vector<Tensor> out;
  for (const auto& l : p.prenet) out.insert(out.end(), {l.weight, l.bias});
  out.insert(out.end(), {p.attention_lstm.weight, p.attention_lstm.bias,
                         p.attention_head.weight, p.attention_head.bias});
  for (const auto& l : p.layers) out.insert(out.end(), {l.weight, l.bias});
  out.insert(out.end(), {p.projection.weight, p.projection.bias});
  return out;
}

void zero_all(const DecoderParams& p) {
  for (auto t : all_params(p)) {
    for (auto& v : t.mutable_value()) v = 0.0;
  }
}

// Scalar reference pieces.
using Vec = std::vector<double>;
double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }
Vec lin(const Vec& x, const Tensor& w, const Tensor& b) {
  Vec y(w.cols());
  for (std::size_t o = 0; o < w.cols(); ++o) {
    double a = b.at(0, o);
    for (std::size_t i = 0; i < x.size(); ++i) a += x[i] * w.at(i, o);
    y[o] = a;
  }
  return y;
}
Vec cat(std::initializer_list<Vec> parts) {
  Vec out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}
std::pair<Vec, Vec> lstm(const Vec& x, const Vec& h, const Vec& c, const nn::LstmParams& p) {
  const std::size_t H = h.size();
  const Vec g = lin(cat({x, h}), p.weight, p.bias);
  Vec nh(H), nc(H);
  for (std::size_t u = 0; u < H; ++u) {
    nc[u] = sig(g[H + u]) * c[u] + sig(g[u]) * std::tanh(g[2 * H + u]);
    nh[u] = sig(g[3 * H + u]) * std::tanh(nc[u]);
  }
  return {nh, nc};
}
Vec row(const Tensor& t, std::size_t r = 0) {
  return Vec(t.value().begin() + r * t.cols(), t.value().begin() + (r + 1) * t.cols());
}

}  // namespace

TEST_CASE("prenet zero propagation and degenerate dropout") {
  Rng rng(1);
  auto cfg = tiny();
  auto p = DecoderParams::init(cfg, 6, rng);
  for (auto& l : p.prenet) {
    for (auto& v : l.bias.mutable_value()) v = 0.0;
  }
  const Tensor zero = Tensor::zeros({1, 80});
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng d(s);
    const Tensor y = prenet(zero, p, d);
    for (double v : y.value()) CHECK(v == 0.0);
  }
  p.config.prenet_keep_prob = 1.0;
  const Tensor x = rand_tensor(1, 80, rng);
  Rng d(3);
  const Tensor y = prenet(x, p, d);
  const Vec want = lin(lin(row(x), p.prenet[0].weight, p.prenet[0].bias), p.prenet[1].weight,
                       p.prenet[1].bias);
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(y.at(0, i) == doctest::Approx(want[i]));
}

TEST_CASE("prenet Monte-Carlo mean approaches the keep-1 output") {
  // Both layers are linear, so the dropout expectation is the keep-1 output.
  Rng rng(2);
  auto cfg = tiny();
  cfg.prenet_hidden = 16;
  auto p = DecoderParams::init(cfg, 6, rng);
  const Tensor x = rand_tensor(1, 80, rng);
  auto exact_p = p;
  exact_p.config.prenet_keep_prob = 1.0;
  Rng unused(0);
  const Tensor exact = prenet(x, exact_p, unused);
  std::vector<double> acc(16, 0.0), acc2(16, 0.0);
  const int trials = 40000;
  for (int s = 0; s < trials; ++s) {
    Rng d(s);
    const Tensor y = prenet(x, p, d);
    for (std::size_t i = 0; i < 16; ++i) {
      acc[i] += y.at(0, i);
      acc2[i] += y.at(0, i) * y.at(0, i);
    }
  }
  for (std::size_t i = 0; i < 16; ++i) {
    const double mean = acc[i] / trials;
    const double se = std::sqrt((acc2[i] / trials - mean * mean) / trials);
    CAPTURE(i);
    CHECK(std::abs(mean - exact.at(0, i)) < 4.0 * se);
  }
}

TEST_CASE("attention weights") {
  // K = 1, alpha = beta = 1, kappa on a position: peak value exactly 1.
  const Tensor one = Tensor::constant({1, 1}, {1.0});
  const std::size_t len = 5;
  const Tensor phi = gm_attention_weights(one, one, Tensor::constant({1, 1}, {2.0}), {&len, 1});
  CHECK(phi.at(0, 2) == 1.0);
  CHECK(phi.at(0, 1) == doctest::Approx(std::exp(-1.0)));

  // K = 2, T = 5, hand-set parameters against a double loop.
  const double a[2] = {0.7, 1.3}, b[2] = {0.4, 2.0}, k[2] = {1.25, 3.5};
  std::vector<double> mem(5 * 3);
  Rng rng(3);
  for (auto& v : mem) v = rng.normal();
  const Tensor memory = Tensor::constant({5, 3}, mem);
  const Tensor p2 = gm_attention_weights(Tensor::constant({1, 2}, {a[0], a[1]}),
                                         Tensor::constant({1, 2}, {b[0], b[1]}),
                                         Tensor::constant({1, 2}, {k[0], k[1]}), {&len, 1});
  const Tensor ctx = attend(p2, {&memory, 1});
  for (std::size_t j = 0; j < 3; ++j) {
    double c = 0.0;
    for (std::size_t u = 0; u < 5; ++u) {
      double w = 0.0;
      for (int m = 0; m < 2; ++m) w += a[m] * std::exp(-b[m] * (k[m] - double(u)) * (k[m] - double(u)));
      if (j == 0) CHECK(std::abs(p2.at(0, u) - w) < 1e-12);
      c += w * mem[u * 3 + j];
    }
    CHECK(std::abs(ctx.at(0, j) - c) < 1e-12);
  }

  // Ragged lanes: zero beyond each lane's length, never negative.
  const std::size_t lens[2] = {2, 4};
  const Tensor two = Tensor::constant({2, 1}, {1.0, 1.0});
  const Tensor ragged = gm_attention_weights(two, two, Tensor::constant({2, 1}, {0.5, 3.0}), lens);
  CHECK(ragged.cols() == 4);
  CHECK(ragged.at(0, 2) == 0.0);
  CHECK(ragged.at(0, 3) == 0.0);
  for (double v : ragged.value()) CHECK(v >= 0.0);
  const std::size_t zero = 0;
  CHECK_THROWS_AS(gm_attention_weights(one, one, one, {&zero, 1}), EmptyMemory);
}

TEST_CASE("kappa step at zero pre-activation is ln 2") {
  Rng rng(4);
  auto cfg = tiny();
  cfg.attention_step_bias = 0.0;
  auto p = DecoderParams::init(cfg, 3, rng);
  for (auto& v : p.attention_head.weight.mutable_value()) v = 0.0;
  const Tensor memory = rand_tensor(4, 3, rng);
  const auto state = DecoderState::initial(p, 1);
  const auto step = gm_attention_step(rand_tensor(1, 4, rng), state.attention, {&memory, 1}, p);
  for (double k : step.state.kappa.value()) CHECK(k == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  for (double a : step.state.alpha.value()) CHECK(a == 1.0);

  const Tensor empty = Tensor::zeros({0, 3});
  CHECK_THROWS_AS(gm_attention_step(rand_tensor(1, 4, rng), state.attention, {&empty, 1}, p),
                  EmptyMemory);
}

TEST_CASE("decode_step contract and zero parameters") {
  Rng rng(5);
  auto p = DecoderParams::init(tiny(), 6, rng);
  const Tensor memory = rand_tensor(5, 6, rng);
  auto state = DecoderState::initial(p, 1);
  for (int s = 0; s < 10; ++s) {
    auto out = decode_step(state, {&memory, 1}, p, rng, nn::Mode::kTrain);
    CHECK(out.frame.shape() == nn::Shape{1, 80});
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(out.state.attention.kappa.at(0, k) > state.attention.kappa.at(0, k));
    }
    state = out.state.detached();
  }
  zero_all(p);
  const auto z = decode_step(DecoderState::initial(p, 1), {&memory, 1}, p, rng, nn::Mode::kTrain);
  for (double v : z.frame.value()) CHECK(v == 0.0);
}

TEST_CASE("tiny decode_step matches a scalar oracle") {
  Rng rng(6);
  auto cfg = tiny(3);
  cfg.prenet_keep_prob = 1.0;
  auto p = DecoderParams::init(cfg, 2, rng);
  for (auto t : all_params(p)) {
    for (auto& v : t.mutable_value()) v += rng.normal(0.0, 0.2);
  }
  const Tensor memory = rand_tensor(3, 2, rng);
  auto state = DecoderState::initial(p, 1);
  state.prev_frame = rand_tensor(1, 3, rng);
  state.attention.context = rand_tensor(1, 2, rng);
  state.attention.kappa = Tensor::constant({1, 2}, {0.3, 0.9});
  state.attention.lstm = {rand_tensor(1, 4, rng, false, 0.5), rand_tensor(1, 4, rng, false, 0.5)};
  for (auto& l : state.layers) l = {rand_tensor(1, 4, rng, false, 0.5), rand_tensor(1, 4, rng, false, 0.5)};
  Rng d(0);
  const auto got = decode_step(state, {&memory, 1}, p, d, nn::Mode::kEval);

  const Vec pre = lin(lin(row(state.prev_frame), p.prenet[0].weight, p.prenet[0].bias),
                      p.prenet[1].weight, p.prenet[1].bias);
  const auto [ah, ac] = lstm(cat({pre, row(state.attention.context)}), row(state.attention.lstm.h),
                             row(state.attention.lstm.c), p.attention_lstm);
  const Vec head = lin(ah, p.attention_head.weight, p.attention_head.bias);
  Vec kappa(2), ctx(2, 0.0);
  for (int m = 0; m < 2; ++m) kappa[m] = state.attention.kappa.at(0, m) + std::log1p(std::exp(head[4 + m]));
  for (std::size_t u = 0; u < 3; ++u) {
    double w = 0;
    for (int m = 0; m < 2; ++m) {
      w += std::exp(head[m]) * std::exp(-std::exp(head[2 + m]) * (kappa[m] - u) * (kappa[m] - u));
    }
    for (std::size_t j = 0; j < 2; ++j) ctx[j] += w * memory.at(u, j);
  }
  const auto [h1, c1] = lstm(cat({pre, ctx}), row(state.layers[0].h), row(state.layers[0].c), p.layers[0]);
  const auto [h2, c2] = lstm(cat({pre, ctx, h1}), row(state.layers[1].h), row(state.layers[1].c), p.layers[1]);
  const Vec frame = lin(h2, p.projection.weight, p.projection.bias);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(got.frame.at(0, i) - frame[i]) < 1e-12);
  for (std::size_t m = 0; m < 2; ++m) CHECK(std::abs(got.state.attention.kappa.at(0, m) - kappa[m]) < 1e-12);
  for (std::size_t j = 0; j < 2; ++j) CHECK(std::abs(got.state.attention.context.at(0, j) - ctx[j]) < 1e-12);
}

TEST_CASE("attention gradient reaches the pre-net") {
  Rng rng(7);
  auto p = DecoderParams::init(tiny(), 6, rng);
  const Tensor memory = rand_tensor(5, 6, rng);
  const auto state = DecoderState::initial(p, 1);
  Rng d(1);
  const Tensor pre = prenet(rand_tensor(1, 80, rng), p, d);
  const auto step = gm_attention_step(pre, state.attention, {&memory, 1}, p);
  nn::backward(nn::add(nn::sum(step.context), nn::sum(step.state.kappa)));
  for (const auto& l : p.prenet) {
    double n = 0;
    for (double g : l.weight.grad()) n += g * g;
    CHECK(n > 0.0);
  }
}

TEST_CASE("gm_attention_step and decode_step pass grad_check over 20 seeds") {
  double worst_att = 0.0, worst_dec = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    auto cfg = tiny(5);
    auto p = DecoderParams::init(cfg, 3, rng);
    std::vector<Tensor> mems = {rand_tensor(4, 3, rng, true), rand_tensor(6, 3, rng, true)};
    auto state = DecoderState::initial(p, 2);
    state.prev_frame = rand_tensor(2, 5, rng, true);
    state.attention.kappa = rand_tensor(2, 2, rng, true);
    state.attention.context = rand_tensor(2, 3, rng, true, 0.3);
    const Tensor pre = rand_tensor(2, 4, rng, true);
    const Tensor w3 = rand_tensor(2, 3, rng), w5 = rand_tensor(2, 5, rng), wk = rand_tensor(2, 2, rng);
    auto params = all_params(p);
    std::vector<Tensor> att_params = {pre, state.attention.kappa, state.attention.context,
                                      p.attention_lstm.weight, p.attention_head.weight,
                                      p.attention_head.bias, mems[0], mems[1]};
    const nn::GradCheckOptions opts{1e-5, 16, seed};
    worst_att = std::max(worst_att, nn::grad_check(
        [&] {
          const auto s = gm_attention_step(pre, state.attention, mems, p);
          return nn::add(nn::sum(nn::mul(s.context, w3)), nn::sum(nn::mul(s.state.kappa, wk)));
        },
        att_params, opts));
    params.insert(params.end(), {state.prev_frame, state.attention.kappa, mems[0], mems[1]});
    worst_dec = std::max(worst_dec, nn::grad_check(
        [&] {
          Rng frozen(seed * 31);  // same dropout masks on every probe
          const auto s = decode_step(state, mems, p, frozen, nn::Mode::kTrain);
          return nn::sum(nn::mul(s.frame, w5));
        },
        params, opts));
  }
  CHECK(worst_att < 1e-4);
  CHECK(worst_dec < 1e-4);
}

TEST_CASE("teacher-forced loss against an elementwise loop") {
  Rng rng(8);
  auto p = DecoderParams::init(tiny(), 6, rng);
  std::vector<Tensor> mems = {rand_tensor(4, 6, rng), rand_tensor(3, 6, rng)};
  FrameBatch frames(2, 3, 80);
  for (auto& v : frames.data) v = rng.normal();
  const auto start = DecoderState::initial(p, 2);

  Rng a(11);
  const auto result = teacher_forced_loss(frames, start, mems, p, a, nn::Mode::kTrain);
  Rng b(11);
  auto state = start;
  double acc = 0.0;
  for (std::size_t s = 0; s < 3; ++s) {
    if (s > 0) state.prev_frame = frames.step(s - 1);
    const auto out = decode_step(state, mems, p, b, nn::Mode::kTrain);
    for (std::size_t lane = 0; lane < 2; ++lane) {
      for (std::size_t d = 0; d < 80; ++d) {
        const double e = out.frame.at(lane, d) - frames.at(lane, s, d);
        acc += e * e;
      }
    }
    state = out.state;
  }
  CHECK(result.loss.item() == doctest::Approx(acc / (2 * 3 * 80)).epsilon(1e-12));
  for (std::size_t d = 0; d < 80; ++d) {
    CHECK(result.final_state.prev_frame.at(1, d) == frames.at(1, 2, d));
  }

  zero_all(p);
  FrameBatch zeros(2, 3, 80);
  Rng c(1);
  CHECK(teacher_forced_loss(zeros, start, mems, p, c, nn::Mode::kTrain).loss.item() == 0.0);
  FrameBatch doubled = frames;
  for (auto& v : doubled.data) v *= 2;
  Rng e1(1), e2(1);
  const double l1 = teacher_forced_loss(frames, start, mems, p, e1, nn::Mode::kTrain).loss.item();
  const double l2 = teacher_forced_loss(doubled, start, mems, p, e2, nn::Mode::kTrain).loss.item();
  CHECK(l2 == doctest::Approx(4 * l1));
}

TEST_CASE("lane reset zeroes state and blocks carried gradients") {
  Rng rng(9);
  auto p = DecoderParams::init(tiny(), 6, rng);
  std::vector<Tensor> mems = {rand_tensor(4, 6, rng), rand_tensor(5, 6, rng)};
  auto state = DecoderState::initial(p, 2);
  for (int s = 0; s < 3; ++s) state = decode_step(state, mems, p, rng, nn::Mode::kTrain).state;
  CHECK(state.lane_norm(0) > 0.0);
  const auto reset = state.reset_lanes({true, false}, p);
  CHECK(reset.lane_norm(0) == 0.0);
  CHECK(reset.lane_norm(1) == state.lane_norm(1));
  CHECK(reset.attention.alpha.at(0, 0) == 1.0);
  CHECK(!reset.attention.lstm.h.requires_grad());
}

TEST_CASE("generation") {
  Rng rng(10);
  auto p = DecoderParams::init(tiny(), 6, rng);
  const Tensor memory = rand_tensor(4, 6, rng);
  Rng g1(1);
  const auto one = generate_frames(memory, p, 1, g1);
  CHECK(one.frames.rows() == 1);
  CHECK(one.frames.cols() == 80);

  Rng g2(2);
  const auto run = generate_frames(memory, p, 60, g2);
  for (std::size_t s = 1; s < run.kappa.size(); ++s) {
    for (std::size_t k = 0; k < run.kappa[s].size(); ++k) CHECK(run.kappa[s][k] > run.kappa[s - 1][k]);
  }

  // A large step bias walks off the end and stops after the patience window.
  auto fast = p;
  for (auto& v : fast.attention_head.weight.mutable_value()) v = 0.0;
  for (std::size_t k = 4; k < 6; ++k) fast.attention_head.bias.mutable_value()[k] = 1.0;  // ~1.31 / step
  Rng g3(3);
  const auto stopped = generate_frames(memory, fast, 100, g3);
  CHECK(stopped.stopped_by_attention);
  // Mean passes 3 + 2 = 5 at step 4 (kappa 5.25), then 5 consecutive steps.
  CHECK(stopped.frames.rows() == 8);
  Rng g4(3);
  const auto full = generate_frames(memory, fast, 30, g4, false);
  CHECK_FALSE(full.stopped_by_attention);
  CHECK(full.frames.rows() == 30);
  for (std::size_t i = 0; i < 8 * stopped.frames.cols(); ++i) {
    CHECK(full.frames.data()[i] == stopped.frames.data()[i]);
  }
  CHECK_THROWS_AS(generate_frames(Tensor::zeros({0, 6}), p, 5, g3), EmptyMemory);
}
