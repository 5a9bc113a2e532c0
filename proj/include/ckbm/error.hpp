#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ckbm {

enum class ErrorKind {
  Validation,
  Alignment,
  InconsistentInput,
  NotContextualized,
  ConstraintNotFound,
  UnassignedVariable,
  GenerationFailed,
  Syntax,
  Io,
  SpaceTooLarge,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::InconsistentInput: return "inconsistent input";
    case ErrorKind::NotContextualized: return "not contextualized";
    case ErrorKind::ConstraintNotFound: return "constraint not found";
    case ErrorKind::UnassignedVariable: return "unassigned variable";
    case ErrorKind::GenerationFailed: return "generation failed";
    case ErrorKind::Syntax: return "syntax error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::SpaceTooLarge: return "search space too large";
  }
  return "error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message)
      : Error(ErrorKind::Syntax, std::to_string(line) + ":" +
                                     std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace ckbm
