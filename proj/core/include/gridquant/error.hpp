#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridquant {

enum class Errc {
  GridOverflow,
  IndexOutOfRange,
  LengthMismatch,
  InvalidArgument,
  InvalidSigma,
  Divergent,
  InvalidEps,
  EmptyRange,
  NonFiniteState,
  InvalidGraph,
  Disconnected,
  NoConvergence,
  RankDeficiency,
  NotInImage,
  ConnectivityTimeout,
  InnerSolverFailure,
  EmptySample,
  KappaTooSmall,
  ParseError,
  DimensionMismatch,
  NegativeObjective,
  NonPositiveRate,
  DomainError,
  DegenerateP,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& what);

}  // namespace gridquant
