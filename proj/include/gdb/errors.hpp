#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gdb {

enum class ErrorCode {
  // input / scenario
  ParseError,
  DuplicateNodeId,
  RoleMismatch,
  ParamOutOfRange,
  PolicyInapplicable,
  MissingField,
  UnknownFigure,
  // simulation
  CausalityViolation,
  ProtocolStall,
  // crypto
  OpeningMismatch,
  UnknownKey,
  // protocol
  LengthMismatch,
  ResponseMismatch,
  CommitMismatch,
  AuthFailure,
  MissingCommitment,
  NoActiveVerifier,
  // estimation
  NegativeTimeOfFlight,
  NegativeBound,
  NoIntersection,
  IncompleteCycle,
  SolveFailure,
  MissingToF,
};

std::string_view to_string(ErrorCode code);

// Input errors are the caller's fault (bad scenario, bad flag); everything
// else is a runtime/protocol outcome.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace gdb
