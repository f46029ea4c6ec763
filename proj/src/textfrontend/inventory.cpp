// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <algorithm>
#include <string>

#include "mixtts/error.hpp"
#include "mixtts/textfrontend.hpp"

namespace mixtts::text {
namespace {

constexpr std::size_t kPaddedSize = 49;

std::vector<std::string> padded(std::vector<std::string> symbols, const std::string& tag) {
  for (std::size_t i = 0; symbols.size() < kPaddedSize; ++i) {
    symbols.push_back("<" + tag + std::to_string(i) + ">");
  }
  return symbols;
}

}  // namespace

const SymbolInventory& SymbolInventory::standard() {
  static const SymbolInventory inventory = [] {
    std::vector<std::string> chars;
    for (char c = 'a'; c <= 'z'; ++c) chars.emplace_back(1, c);
    for (char c : std::string(" '.,?!;:-")) chars.emplace_back(1, c);
    std::vector<std::string> phones = {
        "aa", "ae", "ah", "ao", "aw", "ay", "b",  "ch", "d",  "dh", "eh", "er", "ey",
        "f",  "g",  "hh", "ih", "iy", "jh", "k",  "l",  "m",  "n",  "ng", "ow", "oy",
        "p",  "r",  "s",  "sh", "t",  "th", "uh", "uw", "v",  "w",  "y",  "z",  "zh"};
    return SymbolInventory(padded(std::move(chars), "c"), padded(std::move(phones), "p"));
  }();
  return inventory;
}

SymbolInventory::SymbolInventory(std::vector<std::string> char_symbols,
                                 std::vector<std::string> phone_symbols)
    : chars_(std::move(char_symbols)), phones_(std::move(phone_symbols)) {
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    if (!char_index_.emplace(chars_[i], static_cast<int>(i)).second) {
      throw DataError("duplicate character symbol: " + chars_[i]);
    }
  }
  for (std::size_t i = 0; i < phones_.size(); ++i) {
    if (!phone_index_.emplace(phones_[i], static_cast<int>(i)).second) {
      throw DataError("duplicate phoneme symbol: " + phones_[i]);
    }
  }
  vocab_size_ = std::max(chars_.size(), phones_.size());
}

std::optional<int> SymbolInventory::char_id(char c) const {
  const auto it = char_index_.find(std::string_view(&c, 1));
  if (it == char_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> SymbolInventory::phone_id(std::string_view phone) const {
  // Reserved padding entries are not real phonemes.
  if (phone.empty() || phone.front() == '<') return std::nullopt;
  const auto it = phone_index_.find(phone);
  if (it == phone_index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace mixtts::text
