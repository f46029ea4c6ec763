// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mixtts/dsp.hpp"

namespace mixtts::dsp {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t read_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), {}};
  const std::string where = path.string() + ": ";
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw DataError(where + "not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw DataError(where + "truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw DataError(where + "short fmt chunk");
      const std::uint16_t format = read_u16(bytes.data() + body);
      const std::uint16_t channels = read_u16(bytes.data() + body + 2);
      const std::uint32_t rate = read_u32(bytes.data() + body + 4);
      const std::uint16_t bits = read_u16(bytes.data() + body + 14);
      if (format != 1 || bits != 16) throw DataError(where + "only 16-bit PCM is supported");
      if (channels != 1) throw DataError(where + "only mono audio is supported");
      if (rate != static_cast<std::uint32_t>(kSampleRate)) {
        throw DataError(where + "sample rate " + std::to_string(rate) + " (expected 22050)");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw DataError(where + "data chunk before fmt chunk");
      Waveform w;
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(read_u16(bytes.data() + body + 2 * i));
        w.samples[i] = v / 32768.0;
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw DataError(where + "no data chunk");
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  const auto n = static_cast<std::uint32_t>(w.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, 2 * n);
  for (double s : w.samples) {
    const long q = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

std::string encode_mel(const Matrix& frames) {
  std::string out = "MIXMEL01";
  put_u32(out, static_cast<std::uint32_t>(frames.rows()));
  put_u32(out, static_cast<std::uint32_t>(frames.cols()));
  for (double v : frames.data()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32(out, static_cast<std::uint32_t>(bits));
    put_u32(out, static_cast<std::uint32_t>(bits >> 32));
  }
  return out;
}

Matrix decode_mel(std::string_view data) {
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  if (data.size() < 16 || std::memcmp(bytes, "MIXMEL01", 8) != 0) {
    throw DataError("not a MIXMEL01 feature file");
  }
  const std::size_t rows = read_u32(bytes + 8), cols = read_u32(bytes + 12);
  if (data.size() != 16 + rows * cols * 8) throw DataError("truncated MIXMEL01 feature file");
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const unsigned char* p = bytes + 16 + 8 * i;
    const std::uint64_t bits = read_u32(p) | (static_cast<std::uint64_t>(read_u32(p + 4)) << 32);
    std::memcpy(&m.data()[i], &bits, sizeof bits);
  }
  return m;
}

void save_mel(const std::filesystem::path& path, const Matrix& frames) {
  const std::string out = encode_mel(frames);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

Matrix load_mel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path.string());
  const std::string bytes{std::istreambuf_iterator<char>(in), {}};
  try {
    return decode_mel(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace mixtts::dsp
