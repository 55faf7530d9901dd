#pragma once

#include <stdexcept>
#include <string>

namespace spanclean {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Syntax error in a regex or program source, with a 1-based offset into
/// the offending text.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " (offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Semantic error while validating or evaluating a program.
class ProgramError : public Error {
 public:
  ProgramError(std::string kind, const std::string& msg)
      : Error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;  // e.g. "schema-mismatch", "unknown-formula"
};

}  // namespace spanclean
