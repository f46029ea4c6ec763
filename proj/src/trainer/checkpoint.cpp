// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <cstring>
#include <fstream>
#include <iterator>

#include "mixtts/trainer.hpp"

namespace mixtts::trainer {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_name(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  std::uint64_t u(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw DataError("checkpoint is truncated");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

// Layout: magic, u32 version, u32 tensor count, then per tensor a
// length-prefixed name, u32 rows, u32 cols and raw little-endian doubles;
// u32 string count, then per string a length-prefixed name and a
// u64-length-prefixed value. Maps are ordered, so bytes are canonical.
std::string Checkpoint::to_bytes() const {
  std::string out(kCheckpointMagic);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, m] : tensors) {
    put_name(out, name);
    put_u32(out, static_cast<std::uint32_t>(m.rows()));
    put_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (double v : m.data()) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      put_u64(out, bits);
    }
  }
  put_u32(out, static_cast<std::uint32_t>(strings.size()));
  for (const auto& [name, value] : strings) {
    put_name(out, name);
    put_u64(out, value.size());
    out += value;
  }
  return out;
}

Checkpoint Checkpoint::from_bytes(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw DataError("not a checkpoint (bad magic)");
  }
  const auto version = r.u(4);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  const auto n_tensors = r.u(4);
  for (std::uint64_t i = 0; i < n_tensors; ++i) {
    std::string name = r.bytes(r.u(4));
    const std::size_t rows = r.u(4), cols = r.u(4);
    Matrix m(rows, cols);
    for (auto& v : m.data()) {
      const std::uint64_t bits = r.u(8);
      std::memcpy(&v, &bits, sizeof bits);
    }
    c.tensors.emplace(std::move(name), std::move(m));
  }
  const auto n_strings = r.u(4);
  for (std::uint64_t i = 0; i < n_strings; ++i) {
    std::string name = r.bytes(r.u(4));
    c.strings.emplace(std::move(name), r.bytes(r.u(8)));
  }
  if (!r.done()) throw DataError("checkpoint has trailing bytes");
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  const std::string bytes = to_bytes();
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), {}};
  try {
    return from_bytes(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace mixtts::trainer
