#pragma once

#include <stdexcept>
#include <string>

namespace shapmix {

enum class ErrorKind { config, data, parse, numeric, io };

// Base of every exception the library throws. `field` names the offending
// configuration key when one is known (empty otherwise).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::string field = {})
      : std::runtime_error(what), kind_(kind), field_(std::move(field)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorKind kind_;
  std::string field_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : Error(ErrorKind::config, what, std::move(field)) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what)
      : Error(ErrorKind::data, what) {}
};

enum class ParseErrorKind {
  malformed_manifest,
  dim_mismatch,
  truncated_payload,
  malformed_checkpoint,
  malformed_partition,
};

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind which, const std::string& what)
      : Error(ErrorKind::parse, what), which_(which) {}

  ParseErrorKind which() const noexcept { return which_; }

 private:
  ParseErrorKind which_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

}  // namespace shapmix
