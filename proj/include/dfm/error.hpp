#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dfm {

enum class ErrorKind {
  Syntax,
  DanglingReference,
  CyclicHierarchy,
  NonIntegralCoordinate,
  InvalidValue,
  UnknownCell,
  Overflow,
  Short,
  DuplicateName,
  UnknownKind,
  RuleOrdering,
  NonRectangularVia,
  MissingSpacingRule,
  DigestMismatch,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dfm
