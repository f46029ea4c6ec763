// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mixtts/nn/tensor.hpp"
#include "mixtts/random.hpp"

namespace mixtts::nn {

// Linear algebra -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
/// x [n x in] . W [in x out] + b [1 x out]
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
/// Adds a 1 x cols row to every row of x.
Tensor add_row(const Tensor& x, const Tensor& row);

// Elementwise --------------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
/// Multiplies by a fixed (non-differentiable) array of the same size.
Tensor mul_constant(const Tensor& x, std::span<const double> factors);
/// Scales row r of x by factors[r] (non-differentiable factors).
Tensor scale_rows(const Tensor& x, std::span<const double> factors);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
/// ln(1 + e^x) evaluated as max(x, 0) + log1p(e^-|x|).
Tensor softplus(const Tensor& x);
Tensor exp(const Tensor& x);

double softplus(double x);

// Structure ----------------------------------------------------------------

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);
/// Rows of `table` selected by `ids`; gradients scatter-add back.
Tensor gather_rows(const Tensor& table, std::span<const int> ids);
/// Same-padded sliding windows: row t holds x[t - k/2 .. t + k/2] flattened
/// (zeros outside the sequence). Output is [T x k*C].
Tensor im2col(const Tensor& x, std::size_t kernel);
/// Row-reversed copy (time reversal of a [T x C] sequence).
Tensor reverse_rows(const Tensor& x);

// Layers -------------------------------------------------------------------

/// 1-D convolution over rows of x [T x Cin], weight [(kernel*Cin) x Cout],
/// bias [1 x Cout], odd kernel, zero same-padding.
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t kernel);

/// Inverted dropout: kept units are scaled by 1/keep_prob. Identity when
/// inactive or keep_prob == 1.
Tensor dropout(const Tensor& x, double keep_prob, Rng& rng, bool active);

// Reductions ---------------------------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Mean squared error against a constant target of the same shape.
Tensor mse(const Tensor& prediction, const Tensor& target);

}  // namespace mixtts::nn
