#include "gridquant/error.hpp"

namespace gridquant {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::GridOverflow: return "GridOverflow";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidSigma: return "InvalidSigma";
    case Errc::Divergent: return "Divergent";
    case Errc::InvalidEps: return "InvalidEps";
    case Errc::EmptyRange: return "EmptyRange";
    case Errc::NonFiniteState: return "NonFiniteState";
    case Errc::InvalidGraph: return "InvalidGraph";
    case Errc::Disconnected: return "Disconnected";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::RankDeficiency: return "RankDeficiency";
    case Errc::NotInImage: return "NotInImage";
    case Errc::ConnectivityTimeout: return "ConnectivityTimeout";
    case Errc::InnerSolverFailure: return "InnerSolverFailure";
    case Errc::EmptySample: return "EmptySample";
    case Errc::KappaTooSmall: return "KappaTooSmall";
    case Errc::ParseError: return "ParseError";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NegativeObjective: return "NegativeObjective";
    case Errc::NonPositiveRate: return "NonPositiveRate";
    case Errc::DomainError: return "DomainError";
    case Errc::DegenerateP: return "DegenerateP";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void raise(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace gridquant
