#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gct {

enum class ErrorKind {
  InvalidArgument,
  ChartRequired,
  NoConvergence,
  DegenerateFiber,
  BranchAmbiguity,
  StartMismatch,
  NotContracting,
  PostcriticalViolation,
  DepthUnavailable,
  SlowConvergence,
  DegreeOverflow,
  TrapConstructionFailed,
  EmptyBoundary,
  NoRecurrence,
  NewtonEscapedBall,
  TailBudgetExceeded,
  OrbitEscapedDomain,
  EmptyHarvest,
  MismatchedMap,
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gct
