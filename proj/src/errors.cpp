#include "scoregraph/errors.hpp"

namespace scoregraph {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidAlphabet: return "InvalidAlphabet";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::IsolatedInNode: return "IsolatedInNode";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EdgeBudgetOutOfRange: return "EdgeBudgetOutOfRange";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InfeasibleParams: return "InfeasibleParams";
    case ErrorCode::DegeneratePosterior: return "DegeneratePosterior";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ConnectivityViolation: return "ConnectivityViolation";
    case ErrorCode::ScheduleInvalid: return "ScheduleInvalid";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace scoregraph
