// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mixtts {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or missing input data (files, corpora, text, spectrogram contents).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-finite values, divergence, degenerate statistics.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Incompatible tensor or matrix dimensions. Always a programming error.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class MissingFile : public DataError {
 public:
  explicit MissingFile(const std::string& path)
      : DataError("missing file: " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class MalformedLine : public DataError {
 public:
  MalformedLine(std::size_t line_no, const std::string& why)
      : DataError("malformed line " + std::to_string(line_no) + ": " + why),
        line_no_(line_no) {}
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

class EmptyUtterance : public DataError {
 public:
  EmptyUtterance() : DataError("utterance contains no words") {}
};

class IdOutOfRange : public DataError {
 public:
  explicit IdOutOfRange(std::size_t position)
      : DataError("symbol id out of range at position " +
                  std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class EmptyCorpus : public DataError {
 public:
  EmptyCorpus() : DataError("corpus is empty") {}
};

class EmptyMemory : public DataError {
 public:
  EmptyMemory() : DataError("encoder memory has zero length") {}
};

class TooShort : public DataError {
 public:
  explicit TooShort(const std::string& what) : DataError("too short: " + what) {}
};

class BadRange : public DataError {
 public:
  using DataError::DataError;
};

class BadMagnitude : public DataError {
 public:
  using DataError::DataError;
};

class ConfigError : public DataError {
 public:
  using DataError::DataError;
};

class NonFiniteGradient : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonFiniteLoss : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonFiniteFrame : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateBatch : public NumericError {
 public:
  DegenerateBatch()
      : NumericError("batch normalization in train mode needs >= 2 rows") {}
};

}  // namespace mixtts
