#pragma once

#include <stdexcept>
#include <string>

namespace scoregraph {

enum class ErrorCode {
  InvalidAlphabet,
  DuplicateEdge,
  SelfLoop,
  IsolatedInNode,
  IndexOutOfRange,
  EdgeBudgetOutOfRange,
  UnknownNode,
  InfeasibleParams,
  DegeneratePosterior,
  BudgetExceeded,
  NoConvergence,
  ConnectivityViolation,
  ScheduleInvalid,
  InvalidConfig,
  Io,
};

const char* to_string(ErrorCode code);

// Every library failure carries a code so callers (tests, the CLI exit-code
// mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace scoregraph
