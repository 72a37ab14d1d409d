#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace racer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The image carries no mass (all pixels zero after normalization).
class NoMassError : public Error {
 public:
  explicit NoMassError(const std::string& what = "image has zero total mass")
      : Error(what) {}
};

/// Invalid parameters, e.g. a radius that leaves no valid search grid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A coordinate or extent outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormatError : public Error {
 public:
  UnsupportedFormatError(const std::string& what, std::int32_t mode)
      : Error(what), mode_(mode) {}
  std::int32_t mode() const noexcept { return mode_; }

 private:
  std::int32_t mode_;
};

class CorruptFileError : public Error {
 public:
  CorruptFileError(const std::string& what, std::uint64_t expected, std::uint64_t actual)
      : Error(what), expected_(expected), actual_(actual) {}
  std::uint64_t expected_bytes() const noexcept { return expected_; }
  std::uint64_t actual_bytes() const noexcept { return actual_; }

 private:
  std::uint64_t expected_;
  std::uint64_t actual_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Raised by the exact EMD solver when asked to work beyond oracle scale.
class OracleSizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace racer
