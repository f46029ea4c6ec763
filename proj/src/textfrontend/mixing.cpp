// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <cctype>
#include <sstream>

#include "mixtts/error.hpp"
#include "mixtts/textfrontend.hpp"

namespace mixtts::text {
namespace {

bool is_word_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '\'';
}

std::size_t count_words(const std::vector<Token>& tokens) {
  std::size_t n = 0;
  for (const auto& t : tokens) n += t.kind == Token::Kind::kWord ? 1 : 0;
  return n;
}

void append_chars(MixedSequence& seq, std::string_view text, SpanSource source,
                  const SymbolInventory& inventory) {
  const std::size_t start = seq.symbols.size();
  for (char c : text) {
    const auto id = inventory.char_id(c);
    if (!id) continue;  // normalized text only carries inventory characters
    seq.symbols.push_back(*id);
    seq.mask.push_back(0);
  }
  seq.word_spans.push_back({start, seq.symbols.size(), source});
}

}  // namespace

std::vector<Token> tokenize(std::string_view normalized) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < normalized.size()) {
    if (is_word_char(normalized[i])) {
      std::size_t j = i;
      while (j < normalized.size() && is_word_char(normalized[j])) ++j;
      tokens.push_back({Token::Kind::kWord, std::string(normalized.substr(i, j - i))});
      i = j;
    } else {
      tokens.push_back({Token::Kind::kSeparator, std::string(1, normalized[i])});
      ++i;
    }
  }
  return tokens;
}

UtteranceRecord make_record(std::string id, std::string raw,
                            std::optional<std::string> normalized,
                            std::filesystem::path audio_path, const Lexicon* lexicon) {
  UtteranceRecord record;
  record.id = std::move(id);
  record.normalized_text = normalize_text(normalized ? *normalized : raw);
  record.raw_text = std::move(raw);
  record.audio_path = std::move(audio_path);
  for (auto& token : tokenize(record.normalized_text)) {
    if (token.kind == Token::Kind::kWord) record.char_words.push_back(std::move(token.text));
  }
  if (lexicon != nullptr) {
    std::vector<std::optional<Lexicon::Pronunciation>> phones;
    for (const auto& w : record.char_words) {
      const auto* p = lexicon->find(w);
      phones.push_back(p ? std::optional(*p) : std::nullopt);
    }
    record.phone_words = std::move(phones);
  }
  return record;
}

MixedSequence render_words(const UtteranceRecord& record, const Lexicon& lexicon,
                           const std::vector<Rendering>& choices,
                           const SymbolInventory& inventory) {
  const auto tokens = tokenize(record.normalized_text);
  const std::size_t words = count_words(tokens);
  if (words == 0) throw EmptyUtterance();
  if (choices.size() != words) {
    throw DataError("render_words: " + std::to_string(choices.size()) + " choices for " +
                    std::to_string(words) + " words");
  }
  MixedSequence seq;
  std::size_t word_index = 0;
  for (const auto& token : tokens) {
    if (token.kind == Token::Kind::kSeparator) {
      append_chars(seq, token.text, SpanSource::kSeparator, inventory);
      continue;
    }
    const Rendering choice = choices[word_index++];
    const auto* phones = lexicon.find(token.text);
    if (choice == Rendering::kPhonemes && phones != nullptr) {
      const std::size_t start = seq.symbols.size();
      for (const auto& ph : *phones) {
        seq.symbols.push_back(*inventory.phone_id(ph));
        seq.mask.push_back(1);
      }
      seq.word_spans.push_back({start, seq.symbols.size(), SpanSource::kPhonemes});
    } else {
      append_chars(seq, token.text, SpanSource::kCharacters, inventory);
    }
  }
  return seq;
}

MixedSequence mix_words(const UtteranceRecord& record, const Lexicon& lexicon, double p_phone,
                        Rng& rng, const SymbolInventory& inventory) {
  if (!(p_phone >= 0.0 && p_phone <= 1.0)) throw DataError("p_phone outside [0, 1]");
  const std::size_t words = count_words(tokenize(record.normalized_text));
  if (words == 0) throw EmptyUtterance();
  std::vector<Rendering> choices(words);
  for (auto& c : choices) {
    c = rng.bernoulli(p_phone) ? Rendering::kPhonemes : Rendering::kCharacters;
  }
  return render_words(record, lexicon, choices, inventory);
}

MixedSequence encode_fixed(const UtteranceRecord& record, const Lexicon& lexicon, FixedMode mode,
                           const SymbolInventory& inventory) {
  const std::size_t words = count_words(tokenize(record.normalized_text));
  if (words == 0) throw EmptyUtterance();
  const Rendering r = mode == FixedMode::kPwcb ? Rendering::kPhonemes : Rendering::kCharacters;
  return render_words(record, lexicon, std::vector<Rendering>(words, r), inventory);
}

std::string describe(const MixedSequence& seq, const SymbolInventory& inventory) {
  std::ostringstream os;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) os << ' ';
    const auto& table = seq.mask[i] ? inventory.phone_symbols() : inventory.char_symbols();
    const auto& sym = table.at(static_cast<std::size_t>(seq.symbols[i]));
    os << (sym == " " ? "_" : sym);
  }
  return os.str();
}

}  // namespace mixtts::text
