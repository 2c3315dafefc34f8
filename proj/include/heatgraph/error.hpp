#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heatgraph {

enum class ErrorCode {
  // graph-core
  NonPositiveWeight,
  NonPositiveMeasure,
  SelfLoop,
  DuplicateEdge,
  Disconnected,
  UnknownVertex,
  InsufficientRadii,
  // operators
  GraphMismatch,
  InvalidExponent,
  NonConjugateExponents,
  ExponentOrder,
  // heat-kernel
  TimeNegative,
  SeriesDivergenceGuard,
  NoConvergenceAtResourceLimit,
  GridMismatch,
  GridTooCoarse,
  KernelUnavailable,
  // curvature
  NonPositiveFunction,
  NonPositiveKernel,
  // estimates
  ContaminatedWindow,
  TooFewPoints,
  ZeroFunction,
  // parabolic
  InfeasibleRegime,
  NonIntegrablePower,
  NoGrowthDetected,
  ResourceLimit,
  // plumbing
  InvalidArgument,
  UsageError,
  IoError,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace heatgraph
