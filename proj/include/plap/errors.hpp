#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plap {

enum class ErrorKind {
  InvalidArgument,
  EmptyCone,
  NoConvergence,
  BoundaryHit,
  SignMismatch,
  InfeasibleConstraint,
  DegenerateScaling,
  PlateauNotFound,
  SeparationFailed,
  ContinuationStall,
  PathCollapse,
  MaxSweepsExceeded,
  ConvergedToFirstSolution,
  BoundaryMinimizerNotFound,
  NoAdmissibleField,
  ZeroField,
};

std::string_view to_string(ErrorKind kind);

class SolverError : public std::runtime_error {
 public:
  SolverError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw SolverError(kind, what);
}

}  // namespace plap
