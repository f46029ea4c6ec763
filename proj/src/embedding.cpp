// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include "mixtts/embedding.hpp"

#include <cmath>

#include "mixtts/error.hpp"
#include "mixtts/nn/layers.hpp"
#include "mixtts/nn/ops.hpp"

namespace mixtts {

EmbeddingTables EmbeddingTables::init(std::size_t vocab_size, std::size_t dim, Rng& rng) {
  const double symbol_scale = 1.0 / std::sqrt(static_cast<double>(vocab_size));
  const double mask_scale = 1.0 / std::sqrt(2.0);
  EmbeddingTables t;
  t.char_table = nn::Tensor::parameter({vocab_size, dim},
                                       nn::truncated_normal(vocab_size * dim, symbol_scale, rng));
  t.phone_table = nn::Tensor::parameter({vocab_size, dim},
                                        nn::truncated_normal(vocab_size * dim, symbol_scale, rng));
  t.mask_table = nn::Tensor::parameter({2, dim}, nn::truncated_normal(2 * dim, mask_scale, rng));
  return t;
}

EmbeddedSequence embed_mixed(const text::MixedSequence& seq, const EmbeddingTables& tables) {
  if (seq.mask.size() != seq.symbols.size()) throw DataError("embed_mixed: mask length");
  if (seq.symbols.empty()) throw EmptyUtterance();
  const auto vocab = static_cast<int>(tables.vocab_size());
  std::vector<double> phone_weight(seq.size()), char_weight(seq.size());
  for (std::size_t t = 0; t < seq.size(); ++t) {
    if (seq.symbols[t] < 0 || seq.symbols[t] >= vocab) throw IdOutOfRange(t);
    if (seq.mask[t] != 0 && seq.mask[t] != 1) throw IdOutOfRange(t);
    phone_weight[t] = static_cast<double>(seq.mask[t]);
    char_weight[t] = 1.0 - phone_weight[t];
  }
  const nn::Tensor chars = nn::scale_rows(nn::gather_rows(tables.char_table, seq.symbols), char_weight);
  const nn::Tensor phones =
      nn::scale_rows(nn::gather_rows(tables.phone_table, seq.symbols), phone_weight);
  const nn::Tensor mask = nn::gather_rows(tables.mask_table, seq.mask);
  return {nn::add(mask, nn::add(chars, phones))};
}

}  // namespace mixtts
