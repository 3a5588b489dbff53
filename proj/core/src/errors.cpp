#include "embres/errors.hpp"

namespace embres {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::InsufficientNeighbors: return "InsufficientNeighbors";
    case ErrorCode::UndefinedAtRadius: return "UndefinedAtRadius";
    case ErrorCode::NoDefinedSamples: return "NoDefinedSamples";
    case ErrorCode::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorCode::DegenerateCenter: return "DegenerateCenter";
    case ErrorCode::EmptyContext: return "EmptyContext";
    case ErrorCode::ZeroAggregate: return "ZeroAggregate";
    case ErrorCode::MissingContext: return "MissingContext";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::OffManifold: return "OffManifold";
    case ErrorCode::UnknownSingularPoint: return "UnknownSingularPoint";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace embres
