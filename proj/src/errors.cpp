#include "plap/errors.hpp"

namespace plap {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptyCone: return "EmptyCone";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::BoundaryHit: return "BoundaryHit";
    case ErrorKind::SignMismatch: return "SignMismatch";
    case ErrorKind::InfeasibleConstraint: return "InfeasibleConstraint";
    case ErrorKind::DegenerateScaling: return "DegenerateScaling";
    case ErrorKind::PlateauNotFound: return "PlateauNotFound";
    case ErrorKind::SeparationFailed: return "SeparationFailed";
    case ErrorKind::ContinuationStall: return "ContinuationStall";
    case ErrorKind::PathCollapse: return "PathCollapse";
    case ErrorKind::MaxSweepsExceeded: return "MaxSweepsExceeded";
    case ErrorKind::ConvergedToFirstSolution: return "ConvergedToFirstSolution";
    case ErrorKind::BoundaryMinimizerNotFound: return "BoundaryMinimizerNotFound";
    case ErrorKind::NoAdmissibleField: return "NoAdmissibleField";
    case ErrorKind::ZeroField: return "ZeroField";
  }
  return "Unknown";
}

}  // namespace plap
