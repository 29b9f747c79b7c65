#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tohfb {

enum class ErrorCode {
  InvalidArgument,
  InvalidState,
  IllegalMove,
  UnknownState,
  LimitExceeded,
  NoEntry,
  NonConvergence,
  NotAdjacent,
  TargetInStartTriangle,
  InconsistentCounters,
  TooFewTrajectories,
  TargetInT1,
  InvalidCondition,
  SessionExpired,
  SessionNotFound,
  TrialNotActive,
  TrialInProgress,
  WrongCondition,
  NoMoveYet,
  EmptyDataset,
  DegenerateSample,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every failure the library reports. The code is stable
/// and is what the HTTP layer and CLI surface to callers.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace tohfb
