#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hyzeno {

enum class ErrorCode {
  // time domain
  MonotonicityViolation,
  UnknownLevel,
  // expression language
  SyntaxError,
  UnknownIdentifier,
  ArityMismatch,
  TypeMismatch,
  DivisionByZero,
  DomainError,
  IndexOutOfRange,
  SchemaError,
  // dynamics / simulation
  UnknownScenario,
  ParamOutOfRange,
  InvalidConfig,
  IntegrationError,
  NotInJumpSet,
  InvalidInitialCondition,
  // prolongation
  NotZeno,
  NonConvergentTail,
  EmptyOmega,
  // interconnection
  DimensionMismatch,
  NotInputFree,
  // stability
  NegativeDistance,
  GradientUnavailable,
  ChainNotNested,
  BudgetExceeded,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` distinguishes failure kinds.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Parse failure carrying a 1-based character position into the source text.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, std::size_t position, const std::string& message);

  std::size_t position() const noexcept { return position_; }
  /// Message without code or position.
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t position_;
  std::string reason_;
};

}  // namespace hyzeno
