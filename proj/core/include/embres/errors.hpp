#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace embres {

enum class ErrorCode {
  InvalidArgument,
  ZeroVector,
  DimensionMismatch,
  NonPositiveScale,
  InsufficientNeighbors,
  UndefinedAtRadius,
  NoDefinedSamples,
  EmptyNeighborhood,
  DegenerateCenter,
  EmptyContext,
  ZeroAggregate,
  MissingContext,
  InfeasibleSpec,
  OffManifold,
  UnknownSingularPoint,
  MalformedHeader,
  NonFiniteValue,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace embres
