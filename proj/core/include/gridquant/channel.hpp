#pragma once

// Transmission-time model: packet rates, per-iteration delay, and retransmission over
// lossy links. Logarithms are natural.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace gridquant {

/// R(n, p) = C.
struct ConstantRate {
  double capacity = 0.0;
};

/// R(n, p) = C - sqrt(V / n) Q^{-1}(p), without the O(log n / n) remainder.
struct FiniteBlocklengthRate {
  double capacity = 0.0;
  double dispersion = 0.0;
};

/// R(n, p) = max_rate (n / A) exp(1 - n / A), peaking at n = A. The defaults give
/// (n / 5) exp(-n / 5).
struct BellShapeRate {
  double max_rate = std::exp(-1.0);
  double peak = 5.0;
};

using RateModel = std::variant<ConstantRate, FiniteBlocklengthRate, BellShapeRate>;

/// "constant", "finite_blocklength" or "bell".
std::string rate_model_name(const RateModel& model);

/// Standard normal tail probability P(Z > x).
double q_function(double x);

/// x with Q(x) = p, by bisection. Throws Errc::DomainError unless p in (0, 1).
double q_inverse(double p);

/// Rate in bits/second for an n-bit packet sent with failure probability p.
/// Throws Errc::NonPositiveRate when the formula is not positive.
double rate(const RateModel& model, double n, double p = 0.0);

/// n / R(n, p) seconds.
double delay(const RateModel& model, double n, double p = 0.0);

/// Packet layout of one node's message in one iteration.
struct PacketSpec {
  unsigned bits = 16;
  std::size_t dim = 1;
  double theta = 0.0;           ///< header/overhead bits
  double loss = 0.0;            ///< per-transmission failure probability p
  std::size_t link_count = 1;   ///< |L|

  double payload_bits() const { return static_cast<double>(bits) * static_cast<double>(dim); }
  /// n = b d + theta. Throws Errc::InvalidArgument when n < 1.
  double packet_bits() const;
};

/// theta = a * (d b) + c.
double affine_overhead(double a, double c, double payload_bits);

/// Linear rate in transmission time, alpha(b)^(R(n)/n) with n = b d + theta.
/// Throws Errc::Divergent when alpha(b) >= 1.
double time_rate_rho(unsigned bits, double theta, std::size_t dim, double gain, double sigma,
                     const RateModel& model, double p = 0.0);

/// T_eps = k_eps(b) * Delta(n, p) with n = b d + theta.
double time_to_eps(unsigned bits, double theta, std::size_t dim, double gain, double sigma,
                   double bound_d, double eps, const RateModel& model, double p = 0.0);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Bounds on E[M], M the maximum of |L| geometric round counts:
/// [ln|L| / ln(1/p), (1 + ln|L|) / ln(1/p) + 1]. Throws Errc::DegenerateP when p = 0.
Interval retransmission_factors(std::size_t link_count, double p);

/// Exact E[M] = sum_{m >= 0} (1 - (1 - p^m)^|L|).
double expected_rounds_series(std::size_t link_count, double p);

/// Expected total time under communicate-until-success, bracketed as k_eps * Delta * factors.
Interval until_success_bounds(unsigned bits, double theta, std::size_t dim, double p,
                              std::size_t link_count, double gain, double sigma, double bound_d,
                              double eps, const RateModel& model);

/// Rounds of one link: geometric on {1, 2, ...} with success probability 1 - p.
std::uint64_t sample_link_rounds(double p, std::mt19937_64& rng);

/// max over |L| links of their geometric round counts.
std::uint64_t sample_retransmissions(std::size_t link_count, double p, std::mt19937_64& rng);
std::uint64_t sample_retransmissions(std::size_t link_count, double p, std::uint64_t seed);

/// m = ceil(|L| k_eps / ((1 - delta) ln(1/p))).
/// Throws Errc::DegenerateP when p = 0 and Errc::InvalidArgument unless delta in [0, 1).
std::uint64_t fixed_rounds_count(std::size_t link_count, double k_eps, double p, double delta);

struct FixedRoundsPlan {
  std::uint64_t rounds = 0;  ///< m
  double seconds = 0.0;      ///< k_eps * Delta * m
};

FixedRoundsPlan fixed_rounds(unsigned bits, double theta, std::size_t dim, double p,
                             std::size_t link_count, double gain, double sigma, double bound_d,
                             double eps, double delta, const RateModel& model);

/// Total time Delta * sum_k M_k of `iterations` until-success iterations, one value per
/// replica. Replica r draws from a generator seeded with seed ^ r.
std::vector<double> simulate_until_success_times(std::size_t link_count, double p,
                                                 std::size_t iterations, double delay_seconds,
                                                 std::size_t replicas, std::uint64_t seed);

/// Whether every link delivered within m rounds in all `iterations`, one flag per replica.
std::vector<std::uint8_t> simulate_fixed_rounds_success(std::size_t link_count, double p,
                                                        std::size_t iterations,
                                                        std::uint64_t rounds,
                                                        std::size_t replicas,
                                                        std::uint64_t seed);

/// Percentile bootstrap interval for the mean. Throws Errc::EmptySample on empty input.
Interval bootstrap_mean_ci(const std::vector<double>& sample, double level,
                           std::size_t resamples, std::uint64_t seed);

double mean(const std::vector<double>& sample);

}  // namespace gridquant
