#include "cfdim/error.hpp"

namespace cfdim {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InputOutOfRange: return "InputOutOfRange";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::Exhausted: return "Exhausted";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::NoBlocks: return "NoBlocks";
    case ErrorKind::InsufficientBlocks: return "InsufficientBlocks";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::Inadmissible: return "Inadmissible";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what),
      kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace cfdim
