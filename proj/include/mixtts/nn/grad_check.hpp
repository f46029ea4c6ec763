// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mixtts/nn/tensor.hpp"

namespace mixtts::nn {

struct GradCheckOptions {
  double eps = 1e-5;
  /// Coordinates sampled per parameter tensor; all of them when the tensor
  /// is at most this large.
  std::size_t coords_per_param = 24;
  std::uint64_t seed = 7;
};

/// Compares analytic gradients of the scalar computation `f` with central
/// differences at sampled coordinates of `params`. `f` is re-evaluated per
/// probe and must be deterministic (freeze dropout by reseeding inside).
/// Returns max |analytic - numeric| / max(1, |analytic|, |numeric|).
/// Throws NonFiniteGradient if any analytic or numeric value is not finite.
double grad_check(const std::function<Tensor()>& f, std::vector<Tensor> params,
                  const GradCheckOptions& options = {});

}  // namespace mixtts::nn
