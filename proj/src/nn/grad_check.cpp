// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include "mixtts/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixtts/random.hpp"

namespace mixtts::nn {

double grad_check(const std::function<Tensor()>& f, std::vector<Tensor> params,
                  const GradCheckOptions& options) {
  for (auto& p : params) p.zero_grad();
  const Tensor loss = f();
  backward(loss);

  Rng rng(options.seed);
  double worst = 0.0;
  for (auto& p : params) {
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    std::vector<std::size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (coords.size() > options.coords_per_param) {
      std::shuffle(coords.begin(), coords.end(), rng.engine());
      coords.resize(options.coords_per_param);
    }
    auto values = p.mutable_value();
    for (std::size_t i : coords) {
      const double saved = values[i];
      values[i] = saved + options.eps;
      const double plus = f().item();
      values[i] = saved - options.eps;
      const double minus = f().item();
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.eps);
      if (!std::isfinite(numeric) || !std::isfinite(analytic[i])) {
        throw NonFiniteGradient("grad_check: non-finite gradient at coordinate " +
                                std::to_string(i));
      }
      const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
  }
  for (auto& p : params) p.zero_grad();
  return worst;
}

}  // namespace mixtts::nn
