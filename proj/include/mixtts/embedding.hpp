// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
//
// Mixed embedding: each position selects a character or a
// phoneme embedding row by its mask bit and adds an embedding of the mask
// bit itself.
#pragma once

#include <cstddef>

#include "mixtts/nn/tensor.hpp"
#include "mixtts/random.hpp"
#include "mixtts/textfrontend.hpp"

namespace mixtts {

struct EmbeddingTables {
  nn::Tensor char_table;   // [vocab x d]
  nn::Tensor phone_table;  // [vocab x d]
  nn::Tensor mask_table;   // [2 x d]

  /// Truncated normal (+-2 sd) with scale 1/sqrt(vocab) for the symbol
  /// tables and 1/sqrt(2) for the mask table.
  static EmbeddingTables init(std::size_t vocab_size, std::size_t dim, Rng& rng);

  std::size_t vocab_size() const { return char_table.rows(); }
  std::size_t dim() const { return char_table.cols(); }
};

struct EmbeddedSequence {
  nn::Tensor vectors;  // [T x d]
  std::size_t length() const { return vectors.rows(); }
};

/// e_j[t] = (1 - m[t]) * char[s_t] + m[t] * phone[s_t];  e_f[t] = mask[m[t]] + e_j[t].
/// Throws IdOutOfRange(position) for symbols >= vocab or masks outside {0, 1}.
EmbeddedSequence embed_mixed(const text::MixedSequence& seq, const EmbeddingTables& tables);

}  // namespace mixtts
