// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <utility>

#include "mixtts/textfrontend.hpp"

namespace mixtts::text {
namespace {

constexpr std::array<std::string_view, 20> kOnes = {
    "zero",    "one",     "two",       "three",    "four",
    "five",    "six",     "seven",     "eight",    "nine",
    "ten",     "eleven",  "twelve",    "thirteen", "fourteen",
    "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
constexpr std::array<std::string_view, 10> kTens = {
    "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"};

// Abbreviations are matched with their trailing period.
constexpr std::array<std::pair<std::string_view, std::string_view>, 18> kAbbreviations = {{
    {"mrs", "misess"},     {"mr", "mister"},    {"dr", "doctor"},     {"st", "saint"},
    {"co", "company"},     {"jr", "junior"},    {"maj", "major"},     {"gen", "general"},
    {"drs", "doctors"},    {"rev", "reverend"}, {"lt", "lieutenant"}, {"hon", "honorable"},
    {"sgt", "sergeant"},   {"capt", "captain"}, {"esq", "esquire"},   {"ltd", "limited"},
    {"col", "colonel"},    {"ft", "fort"},
}};

// Dotted acronyms, matched with the final period.
constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kDottedAcronyms = {{
    {"u.s.", "united states"},
    {"u.k.", "united kingdom"},
    {"a.m.", "a m"},
    {"p.m.", "p m"},
    {"etc.", "et cetera"},
    {"vs.", "versus"},
}};

// Bare acronyms, matched as whole words.
constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kAcronyms = {{
    {"fbi", "f b i"},
    {"cia", "c i a"},
    {"tv", "t v"},
    {"usa", "u s a"},
    {"bbc", "b b c"},
    {"nasa", "nasa"},
}};

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool iequals_at(std::string_view text, std::size_t pos, std::string_view word) {
  if (pos + word.size() > text.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (lower(text[pos + i]) != word[i]) return false;
  }
  return true;
}

std::string below_thousand(unsigned n) {
  std::string out;
  if (n >= 100) {
    out += kOnes[n / 100];
    out += " hundred";
    n %= 100;
    if (n == 0) return out;
    out += ' ';
  }
  if (n < 20) {
    out += kOnes[n];
  } else {
    out += kTens[n / 10];
    if (n % 10 != 0) {
      out += ' ';
      out += kOnes[n % 10];
    }
  }
  return out;
}

std::string cardinal(unsigned long long n) {
  if (n < 1000) return below_thousand(static_cast<unsigned>(n));
  std::string out = below_thousand(static_cast<unsigned>(n / 1000)) + " thousand";
  if (n % 1000 != 0) out += " " + below_thousand(static_cast<unsigned>(n % 1000));
  return out;
}

std::string digits_one_by_one(std::string_view digits) {
  std::string out;
  for (char d : digits) {
    if (!out.empty()) out += ' ';
    out += kOnes[static_cast<std::size_t>(d - '0')];
  }
  return out;
}

// Year-style reading for 1001..2999, cardinal otherwise.
std::string spoken_integer(std::string_view digits) {
  if (digits.size() > 4) return digits_one_by_one(digits);
  unsigned n = 0;
  for (char d : digits) n = n * 10 + static_cast<unsigned>(d - '0');
  if (n > 1000 && n < 3000) {
    if (n == 2000) return "two thousand";
    if (n > 2000 && n < 2010) return "two thousand " + cardinal(n % 100);
    if (n % 100 == 0) return cardinal(n / 100) + " hundred";
    const unsigned tail = n % 100;
    return cardinal(n / 100) + (tail < 10 ? " oh " : " ") + cardinal(tail);
  }
  return cardinal(n);
}

std::string ordinalize_last_word(std::string words) {
  const auto space = words.rfind(' ');
  const std::size_t start = space == std::string::npos ? 0 : space + 1;
  std::string last = words.substr(start);
  words.erase(start);
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 6> kIrregular = {{
      {"one", "first"}, {"two", "second"}, {"three", "third"},
      {"five", "fifth"}, {"eight", "eighth"}, {"twelve", "twelfth"},
  }};
  for (const auto& [from, to] : kIrregular) {
    if (last == from) return words + std::string(to);
  }
  if (last == "nine") return words + "ninth";
  if (last.back() == 'y') return words + last.substr(0, last.size() - 1) + "ieth";
  return words + last + "th";
}

std::string spoken_ordinal(std::string_view digits) {
  if (digits.size() > 4) return ordinalize_last_word(digits_one_by_one(digits));
  unsigned long long n = 0;
  for (char d : digits) n = n * 10 + static_cast<unsigned>(d - '0');
  return ordinalize_last_word(cardinal(n));
}

bool word_boundary_before(std::string_view text, std::size_t pos) {
  return pos == 0 || !is_alpha(text[pos - 1]);
}

bool word_boundary_after(std::string_view text, std::size_t pos) {
  return pos >= text.size() || !is_alpha(text[pos]);
}

// Expands abbreviations, acronyms and numeric expressions. Output is still
// mixed case; lowercasing and filtering happen afterwards.
std::string expand(std::string_view in) {
  std::string out;
  std::size_t i = 0;
  while (i < in.size()) {
    const char c = in[i];
    if (is_alpha(c) && word_boundary_before(in, i)) {
      bool matched = false;
      for (const auto& [key, value] : kDottedAcronyms) {
        if (iequals_at(in, i, key)) {
          out += value;
          i += key.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
      for (const auto& [key, value] : kAbbreviations) {
        const std::size_t end = i + key.size();
        if (iequals_at(in, i, key) && end < in.size() && in[end] == '.') {
          out += value;
          i = end + 1;
          matched = true;
          break;
        }
      }
      if (matched) continue;
      for (const auto& [key, value] : kAcronyms) {
        if (iequals_at(in, i, key) && word_boundary_after(in, i + key.size())) {
          out += value;
          i += key.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
      // Copy the whole word so abbreviations never match mid-word.
      while (i < in.size() && is_alpha(in[i])) out += in[i++];
      continue;
    }
    if (c == '$' && i + 1 < in.size() && is_digit(in[i + 1])) {
      std::size_t j = i + 1;
      std::string digits;
      while (j < in.size() && (is_digit(in[j]) || (in[j] == ',' && j + 1 < in.size() && is_digit(in[j + 1])))) {
        if (in[j] != ',') digits += in[j];
        ++j;
      }
      out += spoken_integer(digits);
      out += digits == "1" ? " dollar" : " dollars";
      i = j;
      continue;
    }
    if (is_digit(c)) {
      std::size_t j = i;
      std::string digits;
      while (j < in.size() && (is_digit(in[j]) || (in[j] == ',' && j + 1 < in.size() && is_digit(in[j + 1])))) {
        if (in[j] != ',') digits += in[j];
        ++j;
      }
      // Decimal fraction.
      if (j + 1 < in.size() && in[j] == '.' && is_digit(in[j + 1])) {
        std::size_t k = j + 1;
        std::string frac;
        while (k < in.size() && is_digit(in[k])) frac += in[k++];
        out += spoken_integer(digits) + " point " + digits_one_by_one(frac);
        i = k;
        continue;
      }
      // Ordinal suffix.
      if (j + 2 <= in.size()) {
        const std::string_view suffix = in.substr(j, 2);
        const bool ordinal = (iequals_at(suffix, 0, "st") || iequals_at(suffix, 0, "nd") ||
                              iequals_at(suffix, 0, "rd") || iequals_at(suffix, 0, "th")) &&
                             word_boundary_after(in, j + 2);
        if (ordinal) {
          out += spoken_ordinal(digits);
          i = j + 2;
          continue;
        }
      }
      out += spoken_integer(digits);
      if (j < in.size() && in[j] == '%') {
        out += " percent";
        ++j;
      }
      i = j;
      continue;
    }
    if (c == '&') {
      out += " and ";
      ++i;
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

}  // namespace

std::string number_to_words(unsigned long long n) {
  if (n > 9999) return digits_one_by_one(std::to_string(n));
  return cardinal(n);
}

std::string normalize_text(std::string_view raw) {
  const std::string expanded = expand(raw);
  const SymbolInventory& inventory = SymbolInventory::standard();
  std::string out;
  out.reserve(expanded.size());
  bool pending_space = false;
  for (char c : expanded) {
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      pending_space = true;
      continue;
    }
    const char l = lower(c);
    if (l == ' ' || !inventory.has_char(l)) continue;
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += l;
  }
  return out;
}

}  // namespace mixtts::text
