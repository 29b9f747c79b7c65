#include "tohfb/errors.hpp"

namespace tohfb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::IllegalMove: return "IllegalMove";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::LimitExceeded: return "LimitExceeded";
    case ErrorCode::NoEntry: return "NoEntry";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::NotAdjacent: return "NotAdjacent";
    case ErrorCode::TargetInStartTriangle: return "TargetInStartTriangle";
    case ErrorCode::InconsistentCounters: return "InconsistentCounters";
    case ErrorCode::TooFewTrajectories: return "TooFewTrajectories";
    case ErrorCode::TargetInT1: return "TargetInT1";
    case ErrorCode::InvalidCondition: return "InvalidCondition";
    case ErrorCode::SessionExpired: return "SessionExpired";
    case ErrorCode::SessionNotFound: return "SessionNotFound";
    case ErrorCode::TrialNotActive: return "TrialNotActive";
    case ErrorCode::TrialInProgress: return "TrialInProgress";
    case ErrorCode::WrongCondition: return "WrongCondition";
    case ErrorCode::NoMoveYet: return "NoMoveYet";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tohfb
