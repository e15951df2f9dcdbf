#pragma once

#include <stdexcept>
#include <string>

namespace cvcon {

/// Raised when a caller violates an operation's precondition.
class ArgumentError : public std::invalid_argument {
 public:
  explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a computation that should be impossible fails (e.g. a singular
/// system that the parameters rule out).
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ArgumentError(message);
}

}  // namespace cvcon
