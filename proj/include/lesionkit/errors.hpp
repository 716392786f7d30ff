#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lesion {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed PNG/JPEG stream. `offset()` is the number of input bytes the
/// decoder had consumed when it gave up.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedFormatError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class DegenerateRegionError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class InsufficientClassDataError : public Error {
 public:
  using Error::Error;
};

/// Bad user input: config values, manifests, missing files.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace lesion
