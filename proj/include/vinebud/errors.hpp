#pragma once

#include <stdexcept>
#include <string>

namespace vinebud {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller.
struct ArgumentError : Error {
  using Error::Error;
};

// Malformed or truncated encoded image.
struct DecodeError : Error {
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset(offset) {}
  std::size_t offset;
};

// Vocabulary / model / descriptor file does not match the expected layout.
struct FormatError : Error {
  using Error::Error;
};

// Manifest record violates the corpus schema.
struct LoadError : Error {
  using Error::Error;
};

struct TrainingError : Error {
  TrainingError(const std::string& what, double residual)
      : Error(what), residual_violation(residual) {}
  double residual_violation;
};

}  // namespace vinebud
