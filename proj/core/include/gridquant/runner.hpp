#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gridquant/model.hpp"

namespace gridquant {

struct QuantizedRunConfig {
  unsigned bits = 16;
  std::size_t horizon = 100;
  double bound_d = 1.0;                      ///< bound on ||x^0 - x*||
  std::optional<double> gain;                ///< K; computed from the model when empty
  std::optional<double> alpha_override;      ///< replaces alpha(b) in the radius schedule
  std::optional<Eigen::VectorXd> initial_state;
  std::optional<double> stop_at_eps;         ///< stop once ||x^k - x*|| <= eps (needs x*)
  std::uint64_t seed = 0;
};

/// Converts the x^1 - x^0 form of the distance bound to one on ||x^0 - x*||.
double bound_from_first_step(double first_step_norm, double sigma);

struct RunRecord {
  std::size_t k = 0;
  std::optional<double> err;        ///< norm(x^k - x*) when x* is known
  std::optional<double> radius;     ///< r^k, absent for unquantized runs
  std::uint64_t bits_cum = 0;       ///< payload bits over all nodes after k iterations
  std::optional<double> t_seconds;  ///< channel time at which x^k becomes available
  double occupancy = 0.0;           ///< max_i ||c_i^k - q_i^(k-1)||_inf / r^(k-1)
  std::optional<double> objective;
};

/// PrecisionFloor: the radius fell below what double precision resolves relative to the
/// messages (kPrecisionFloor times their largest magnitude so far); the run stops there.
enum class RunStatus { Completed, ReachedEps, GridOverflow, DeliveryFailed, PrecisionFloor };

inline constexpr double kPrecisionFloor = 1e-13;

struct OverflowEvent {
  std::size_t iteration = 0;  ///< k such that c^(k+1) left the grid of radius r^k
  std::size_t node = 0;
  double occupancy = 0.0;
};

struct RunTrace {
  std::vector<RunRecord> records;
  RunStatus status = RunStatus::Completed;
  std::optional<OverflowEvent> overflow;
  unsigned bits = 64;
  double gain = 1.0;
  double alpha = 0.0;       ///< contraction used by the radius schedule
  bool guaranteed = true;   ///< alpha < 1
  std::vector<std::uint64_t> rounds;  ///< transmission rounds per iteration, lossy runs only

  const RunRecord& last() const { return records.back(); }
  std::size_t iterations() const { return records.empty() ? 0 : records.back().k; }
};

/// Unquantized iteration, 64-bit payload accounting.
RunTrace run_exact(const AlgorithmModel& model, const Eigen::VectorXd& x0, std::size_t horizon,
                   std::optional<double> stop_at_eps = std::nullopt);

/// b-bit adaptive-grid iteration. GridOverflow ends the run early and is recorded in the
/// trace rather than thrown, so the partial trace stays available.
RunTrace run_quantized(const AlgorithmModel& model, const QuantizedRunConfig& cfg);

/// First k with err_k > alpha^k * D * (1 + rel_tol), if any.
std::optional<std::size_t> envelope_violation(const RunTrace& trace, double bound_d,
                                              double rel_tol = 1e-9);

/// Writes "k,err,r_k,bits_cum,t_seconds" rows; absent fields are left empty.
void write_trace_csv(std::ostream& out, const RunTrace& trace);

}  // namespace gridquant
