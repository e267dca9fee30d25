#pragma once

#include <stdexcept>
#include <string>

namespace cutkit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A malformed input line or field; carries a 1-based line number when known.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + msg : msg),
        line_number(line) {}
  std::size_t line_number;
};

struct ValidationFailure : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

struct RangeError : Error {
  using Error::Error;
};

struct ArgumentError : Error {
  using Error::Error;
};

struct DecodeError : Error {
  using Error::Error;
};

struct UnsupportedSource : Error {
  using Error::Error;
};

// Requested an SNR against a signal with zero energy.
struct SilentMixError : Error {
  using Error::Error;
};

struct MaterializationError : Error {
  using Error::Error;
};

struct PairingError : Error {
  using Error::Error;
};

struct CollationError : Error {
  using Error::Error;
};

struct ExportError : Error {
  using Error::Error;
};

struct KeyError : Error {
  using Error::Error;
};

struct CorruptionError : Error {
  using Error::Error;
};

}  // namespace cutkit
