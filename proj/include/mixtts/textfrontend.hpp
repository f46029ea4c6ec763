// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
//
// Text frontend: transcript normalization, lexicon ingestion and the
// word-level character/phoneme mixing that feeds the embedding layer.
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mixtts/random.hpp"

namespace mixtts::text {

/// Character and phoneme symbol tables sharing one padded vocabulary size.
class SymbolInventory {
 public:
  /// a-z, space, apostrophe, `. , ? ! ; : -` and 39 stressless ARPAbet
  /// phonemes, both padded with reserved symbols to 49 entries.
  static const SymbolInventory& standard();

  SymbolInventory(std::vector<std::string> char_symbols,
                  std::vector<std::string> phone_symbols);

  std::size_t vocab_size() const noexcept { return vocab_size_; }
  const std::vector<std::string>& char_symbols() const noexcept { return chars_; }
  const std::vector<std::string>& phone_symbols() const noexcept { return phones_; }

  std::optional<int> char_id(char c) const;
  std::optional<int> phone_id(std::string_view phone) const;
  bool has_char(char c) const { return char_id(c).has_value(); }
  bool has_phone(std::string_view phone) const { return phone_id(phone).has_value(); }

 private:
  std::vector<std::string> chars_;
  std::vector<std::string> phones_;
  std::map<std::string, int, std::less<>> char_index_;
  std::map<std::string, int, std::less<>> phone_index_;
  std::size_t vocab_size_ = 0;
};

/// Lowercases, expands abbreviations and numbers, drops characters outside
/// the character inventory and collapses whitespace. Total.
std::string normalize_text(std::string_view raw);

/// Spoken form of a non-negative integer as used by `normalize_text`.
std::string number_to_words(unsigned long long n);

class Lexicon {
 public:
  using Pronunciation = std::vector<std::string>;

  Lexicon() = default;

  /// Returns false (and counts a duplicate) when `word` is already present.
  bool add(const std::string& word, Pronunciation phones);
  const Pronunciation* find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word) != nullptr; }

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t duplicate_count() const noexcept { return duplicates_; }
  const std::map<std::string, Pronunciation, std::less<>>& entries() const noexcept {
    return entries_;
  }

 private:
  std::map<std::string, Pronunciation, std::less<>> entries_;
  std::size_t duplicates_ = 0;
};

/// Reads `word<TAB>ph1 ph2 ...` lines. Stress digits are stripped and
/// phonemes lowercased; blank lines are skipped. Throws MissingFile or
/// MalformedLine (1-based line number).
Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(std::string_view contents);

enum class SpanSource { kCharacters, kPhonemes, kSeparator };

struct WordSpan {
  std::size_t start = 0;  // first symbol position
  std::size_t end = 0;    // one past the last symbol position
  SpanSource source = SpanSource::kSeparator;
  bool operator==(const WordSpan&) const = default;
};

struct MixedSequence {
  std::vector<int> symbols;
  std::vector<int> mask;
  std::vector<WordSpan> word_spans;

  std::size_t size() const noexcept { return symbols.size(); }
  bool operator==(const MixedSequence&) const = default;
};

struct UtteranceRecord {
  std::string id;
  std::string raw_text;
  std::string normalized_text;
  std::filesystem::path audio_path;
  std::vector<std::string> char_words;
  /// One entry per char word when present; nullopt entries are out of lexicon.
  std::optional<std::vector<std::optional<Lexicon::Pronunciation>>> phone_words;
};

/// Builds a record from raw text; `normalized` defaults to normalize_text(raw).
UtteranceRecord make_record(std::string id, std::string raw,
                            std::optional<std::string> normalized = std::nullopt,
                            std::filesystem::path audio_path = {},
                            const Lexicon* lexicon = nullptr);

/// Token of normalized text: a word, a single punctuation mark or a space.
struct Token {
  enum class Kind { kWord, kSeparator } kind;
  std::string text;
};
std::vector<Token> tokenize(std::string_view normalized);

/// Per-word choice; index i is the i-th word token of the utterance.
enum class Rendering { kCharacters, kPhonemes };

/// Renders with explicit per-word choices. Words without a lexicon entry
/// fall back to characters regardless of the requested rendering.
MixedSequence render_words(const UtteranceRecord& record, const Lexicon& lexicon,
                           const std::vector<Rendering>& choices,
                           const SymbolInventory& inventory = SymbolInventory::standard());

/// Draws one Bernoulli(p_phone) per word (in word order) from `rng`.
MixedSequence mix_words(const UtteranceRecord& record, const Lexicon& lexicon,
                        double p_phone, Rng& rng,
                        const SymbolInventory& inventory = SymbolInventory::standard());

enum class FixedMode { kChars, kPwcb };

MixedSequence encode_fixed(const UtteranceRecord& record, const Lexicon& lexicon,
                           FixedMode mode,
                           const SymbolInventory& inventory = SymbolInventory::standard());

/// Human readable rendering, e.g. "t h e _ k ah t".
std::string describe(const MixedSequence& seq,
                     const SymbolInventory& inventory = SymbolInventory::standard());

/// One manifest line `id|raw_text|normalized_text`.
struct ManifestEntry {
  std::string id;
  std::string raw_text;
  std::string normalized_text;
};

/// Parses an LJSpeech-style pipe-delimited manifest. The normalized column
/// may be empty, in which case callers normalize the raw text.
std::vector<ManifestEntry> parse_manifest(std::string_view contents);
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

}  // namespace mixtts::text
