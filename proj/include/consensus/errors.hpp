#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace consensus {

enum class ErrorKind {
  // topology
  RowSumError,
  NegativeWeight,
  ZeroDiagonal,
  SelfLoopError,
  IndexOutOfRange,
  SpectrumError,
  // shared
  DomainError,
  DimensionMismatch,
  NoSpanningTree,
  // gain design
  NotStabilizable,
  UserGainUnstable,
  NotNeutrallyStable,
  NotDetectable,
  SingularProjection,
  IllConditionedBasis,
  Diverged,
  MaxIterations,
  DeltaOutOfRange,
  // simulation
  InfeasibleFormation,
  // front end
  ParseError,
};

std::string_view to_string(ErrorKind kind);

/// Input errors are caused by malformed or inconsistent user data; the
/// remaining kinds are analysis outcomes (the data is fine, the requested
/// design or check is not possible).
bool is_input_error(ErrorKind kind);

class ConsensusError : public std::runtime_error {
 public:
  ConsensusError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw ConsensusError(kind, message);
}

}  // namespace consensus
