// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <fstream>
#include <sstream>

#include "mixtts/error.hpp"
#include "mixtts/textfrontend.hpp"

namespace mixtts::text {

std::vector<ManifestEntry> parse_manifest(std::string_view contents) {
  std::vector<ManifestEntry> entries;
  std::istringstream in{std::string(contents)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto p1 = line.find('|');
    if (p1 == std::string::npos) throw MalformedLine(line_no, "expected id|raw|normalized");
    const auto p2 = line.find('|', p1 + 1);
    ManifestEntry e;
    e.id = line.substr(0, p1);
    if (e.id.empty()) throw MalformedLine(line_no, "empty id");
    if (p2 == std::string::npos) {
      e.raw_text = line.substr(p1 + 1);
    } else {
      e.raw_text = line.substr(p1 + 1, p2 - p1 - 1);
      e.normalized_text = line.substr(p2 + 1);
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str());
}

}  // namespace mixtts::text
