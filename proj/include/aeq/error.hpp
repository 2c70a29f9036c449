#pragma once

#include <stdexcept>
#include <string>

namespace aeq {

/// Broad failure classes. The CLI maps each one onto a process exit code.
enum class ErrorCategory {
  Parse,         // malformed input text or file
  Structural,    // arity / shape mismatch between a value and its schema
  Precondition,  // operation called outside its domain (e.g. flow too short)
  Config,        // invalid configuration value
  Constraint,    // a context constraint is violated or cannot be satisfied
  Capacity,      // an enumeration would exceed its configured cap
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Parse failure with a 1-based source location (0 when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0, int column = 0)
      : Error(ErrorCategory::Parse, format(what, line, column)), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, int line, int column) {
    if (line <= 0) return what;
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
  }

  int line_;
  int column_;
};

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Structural: return "structural";
    case ErrorCategory::Precondition: return "precondition";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Constraint: return "constraint";
    case ErrorCategory::Capacity: return "capacity";
    case ErrorCategory::Internal: return "internal";
  }
  return "internal";
}

}  // namespace aeq
