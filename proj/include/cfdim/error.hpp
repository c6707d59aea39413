#pragma once

#include <stdexcept>
#include <string>

namespace cfdim {

enum class ErrorKind {
  InputOutOfRange,
  Overflow,
  Exhausted,
  EmptyWindow,
  NoBlocks,
  InsufficientBlocks,
  BudgetExceeded,
  NoConvergence,
  OutOfRange,
  Inadmissible,
  Parse,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace cfdim
