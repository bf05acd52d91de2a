#include "gdb/errors.hpp"

namespace gdb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
  case ErrorCode::RoleMismatch: return "RoleMismatch";
  case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
  case ErrorCode::PolicyInapplicable: return "PolicyInapplicable";
  case ErrorCode::MissingField: return "MissingField";
  case ErrorCode::UnknownFigure: return "UnknownFigure";
  case ErrorCode::CausalityViolation: return "CausalityViolation";
  case ErrorCode::ProtocolStall: return "ProtocolStall";
  case ErrorCode::OpeningMismatch: return "OpeningMismatch";
  case ErrorCode::UnknownKey: return "UnknownKey";
  case ErrorCode::LengthMismatch: return "LengthMismatch";
  case ErrorCode::ResponseMismatch: return "ResponseMismatch";
  case ErrorCode::CommitMismatch: return "CommitMismatch";
  case ErrorCode::AuthFailure: return "AuthFailure";
  case ErrorCode::MissingCommitment: return "MissingCommitment";
  case ErrorCode::NoActiveVerifier: return "NoActiveVerifier";
  case ErrorCode::NegativeTimeOfFlight: return "NegativeTimeOfFlight";
  case ErrorCode::NegativeBound: return "NegativeBound";
  case ErrorCode::NoIntersection: return "NoIntersection";
  case ErrorCode::IncompleteCycle: return "IncompleteCycle";
  case ErrorCode::SolveFailure: return "SolveFailure";
  case ErrorCode::MissingToF: return "MissingToF";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
  case ErrorCode::ParseError:
  case ErrorCode::DuplicateNodeId:
  case ErrorCode::RoleMismatch:
  case ErrorCode::ParamOutOfRange:
  case ErrorCode::PolicyInapplicable:
  case ErrorCode::MissingField:
  case ErrorCode::UnknownFigure:
    return true;
  default:
    return false;
  }
}

} // namespace gdb
