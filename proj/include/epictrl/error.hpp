#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epictrl {

enum class ErrorCode {
  InvalidParams,
  InvalidInitialState,
  InvalidControl,
  Undefined,
  NonPositiveS,
  OutsideTriangle,
  InfeasibleStart,
  NoSaturation,
  ConstraintViolated,
  OutOfSingularRange,
  RootNotBracketed,
  NonTerminatingControl,
  HorizonNotFound,
  InconsistentInputs,
  PreconditionViolated,
  ScenarioInvalid,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace epictrl
