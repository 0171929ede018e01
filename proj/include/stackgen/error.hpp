#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stackgen {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. Row numbers are 1-based physical line numbers.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error("line " + std::to_string(row) + ": " + what), row_(row) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  // Same error with `context` prepended to the message.
  ParseError(const std::string& context, const ParseError& inner)
      : Error(context + ": " + inner.what()), row_(inner.row_) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_ = 0;
};

class CodingError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

}  // namespace stackgen
