#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace gea {

// Base class for all recoverable failures raised by the library. The kind()
// string is stable and is what the CLI prints in its machine-readable error
// line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error("parse", what), position_(position) {}

  // Byte offset into the parsed text (or file) where the problem was found.
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("shape", what) {}
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error("format", what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class IncompleteBenchmarkError : public Error {
 public:
  explicit IncompleteBenchmarkError(const std::string& what)
      : Error("incomplete_benchmark", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

class StatsError : public Error {
 public:
  explicit StatsError(const std::string& what) : Error("stats", what) {}
};

class CalibrationError : public Error {
 public:
  explicit CalibrationError(const std::string& what) : Error("calibration", what) {}
};

}  // namespace gea
