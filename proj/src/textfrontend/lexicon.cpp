// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <cctype>
#include <fstream>
#include <sstream>

#include "mixtts/error.hpp"
#include "mixtts/textfrontend.hpp"

namespace mixtts::text {

bool Lexicon::add(const std::string& word, Pronunciation phones) {
  if (entries_.contains(word)) {
    ++duplicates_;
    return false;
  }
  entries_.emplace(word, std::move(phones));
  return true;
}

const Lexicon::Pronunciation* Lexicon::find(std::string_view word) const {
  const auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

Lexicon parse_lexicon(std::string_view contents) {
  const SymbolInventory& inventory = SymbolInventory::standard();
  Lexicon lexicon;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    auto eol = contents.find('\n', pos);
    if (eol == std::string_view::npos) eol = contents.size();
    std::string_view line = contents.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (eol == contents.size()) break;
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw MalformedLine(line_no, "no tab separator");
    std::string word;
    for (char c : line.substr(0, tab)) {
      if (std::isspace(static_cast<unsigned char>(c)) != 0) {
        throw MalformedLine(line_no, "whitespace in word");
      }
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (word.empty()) throw MalformedLine(line_no, "empty word");
    std::istringstream phones_in{std::string(line.substr(tab + 1))};
    Lexicon::Pronunciation phones;
    for (std::string ph; phones_in >> ph;) {
      std::string clean;
      for (char c : ph) {
        if (std::isdigit(static_cast<unsigned char>(c)) != 0) continue;
        clean += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      if (!inventory.has_phone(clean)) throw MalformedLine(line_no, "unknown phoneme '" + ph + "'");
      phones.push_back(std::move(clean));
    }
    if (phones.empty()) throw MalformedLine(line_no, "empty pronunciation");
    lexicon.add(word, std::move(phones));
    if (eol == contents.size()) break;
  }
  return lexicon;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_lexicon(buffer.str());
}

}  // namespace mixtts::text
