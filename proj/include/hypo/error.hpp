#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hypo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input. `position` is a 0-based character offset
/// (or std::string::npos when no position applies).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position = std::string::npos)
      : Error(position == std::string::npos
                  ? what
                  : what + " at position " + std::to_string(position)),
        message_(what),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }
  /// The message without the position suffix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t position_;
};

/// Argument outside an operation's domain (t <= 0, mismatched algebras, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace hypo
