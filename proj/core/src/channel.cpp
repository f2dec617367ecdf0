#include "gridquant/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gridquant/complexity.hpp"
#include "gridquant/error.hpp"
#include "gridquant/parallel.hpp"

namespace gridquant {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_loss(double p) {
  if (!(p >= 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "failure probability " << p << " outside [0, 1)";
    raise(Errc::DomainError, msg.str());
  }
}

void check_lossy(double p) {
  check_loss(p);
  if (p == 0.0) raise(Errc::DegenerateP, "retransmission analysis needs p > 0");
}

double packet_size(unsigned bits, double theta, std::size_t dim) {
  PacketSpec spec;
  spec.bits = bits;
  spec.dim = dim;
  spec.theta = theta;
  return spec.packet_bits();
}

}  // namespace

std::string rate_model_name(const RateModel& model) {
  return std::visit(overloaded{[](const ConstantRate&) { return std::string("constant"); },
                               [](const FiniteBlocklengthRate&) {
                                 return std::string("finite_blocklength");
                               },
                               [](const BellShapeRate&) { return std::string("bell"); }},
                    model);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "Q^{-1} needs p in (0, 1), got " << p;
    raise(Errc::DomainError, msg.str());
  }
  // Q is decreasing; Q(-40) rounds to 1 and Q(40) to 0.
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (q_function(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double rate(const RateModel& model, double n, double p) {
  if (!(n >= 1.0)) {
    std::ostringstream msg;
    msg << "packet length " << n << " below one bit";
    raise(Errc::InvalidArgument, msg.str());
  }
  const double r = std::visit(
      overloaded{[](const ConstantRate& m) { return m.capacity; },
                 [&](const FiniteBlocklengthRate& m) {
                   return m.capacity - std::sqrt(m.dispersion / n) * q_inverse(p);
                 },
                 [&](const BellShapeRate& m) {
                   if (!(m.peak > 0.0)) raise(Errc::InvalidArgument, "bell peak must be positive");
                   return m.max_rate * (n / m.peak) * std::exp(1.0 - n / m.peak);
                 }},
      model);
  if (!(r > 0.0)) {
    std::ostringstream msg;
    msg << rate_model_name(model) << " rate is " << r << " at n = " << n << ", p = " << p;
    raise(Errc::NonPositiveRate, msg.str());
  }
  return r;
}

double delay(const RateModel& model, double n, double p) { return n / rate(model, n, p); }

double PacketSpec::packet_bits() const {
  const double n = payload_bits() + theta;
  if (!(n >= 1.0)) {
    std::ostringstream msg;
    msg << "packet of " << n << " bits";
    raise(Errc::InvalidArgument, msg.str());
  }
  return n;
}

double affine_overhead(double a, double c, double payload_bits) { return a * payload_bits + c; }

double time_rate_rho(unsigned bits, double theta, std::size_t dim, double gain, double sigma,
                     const RateModel& model, double p) {
  const double a = alpha(bits, gain, sigma);
  if (!(a < 1.0)) {
    std::ostringstream msg;
    msg << "alpha(" << bits << ") = " << a << " >= 1";
    raise(Errc::Divergent, msg.str());
  }
  const double n = packet_size(bits, theta, dim);
  return std::pow(a, rate(model, n, p) / n);
}

double time_to_eps(unsigned bits, double theta, std::size_t dim, double gain, double sigma,
                   double bound_d, double eps, const RateModel& model, double p) {
  const double k = iterations_to_eps(bits, gain, sigma, bound_d, eps);
  return k * delay(model, packet_size(bits, theta, dim), p);
}

Interval retransmission_factors(std::size_t link_count, double p) {
  check_lossy(p);
  if (link_count == 0) raise(Errc::InvalidArgument, "need at least one link");
  const double log_l = std::log(static_cast<double>(link_count));
  const double log_inv_p = -std::log(p);
  return {log_l / log_inv_p, (1.0 + log_l) / log_inv_p + 1.0};
}

double expected_rounds_series(std::size_t link_count, double p) {
  check_loss(p);
  if (link_count == 0) raise(Errc::InvalidArgument, "need at least one link");
  const double l = static_cast<double>(link_count);
  double sum = 1.0;  // m = 0
  double pm = 1.0;
  for (int m = 1; m < 100000; ++m) {
    pm *= p;
    const double term = -std::expm1(l * std::log1p(-pm));
    sum += term;
    if (term <= 1e-18 * sum) break;
  }
  return sum;
}

Interval until_success_bounds(unsigned bits, double theta, std::size_t dim, double p,
                              std::size_t link_count, double gain, double sigma, double bound_d,
                              double eps, const RateModel& model) {
  const Interval f = retransmission_factors(link_count, p);
  const double base = time_to_eps(bits, theta, dim, gain, sigma, bound_d, eps, model, p);
  return {base * f.lower, base * f.upper};
}

std::uint64_t sample_link_rounds(double p, std::mt19937_64& rng) {
  check_loss(p);
  if (p == 0.0) return 1;
  // Failures before the first success, plus the successful round.
  std::geometric_distribution<std::uint64_t> failures(1.0 - p);
  return failures(rng) + 1;
}

std::uint64_t sample_retransmissions(std::size_t link_count, double p, std::mt19937_64& rng) {
  check_loss(p);
  if (p == 0.0) return 1;
  std::geometric_distribution<std::uint64_t> failures(1.0 - p);
  std::uint64_t worst = 1;
  for (std::size_t l = 0; l < link_count; ++l) worst = std::max(worst, failures(rng) + 1);
  return worst;
}

std::uint64_t sample_retransmissions(std::size_t link_count, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_retransmissions(link_count, p, rng);
}

std::uint64_t fixed_rounds_count(std::size_t link_count, double k_eps, double p, double delta) {
  check_lossy(p);
  if (!(delta >= 0.0 && delta < 1.0)) raise(Errc::InvalidArgument, "delta must lie in [0, 1)");
  const double m = static_cast<double>(link_count) * k_eps / ((1.0 - delta) * -std::log(p));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(m)));
}

FixedRoundsPlan fixed_rounds(unsigned bits, double theta, std::size_t dim, double p,
                             std::size_t link_count, double gain, double sigma, double bound_d,
                             double eps, double delta, const RateModel& model) {
  check_lossy(p);
  const double k = iterations_to_eps(bits, gain, sigma, bound_d, eps);
  FixedRoundsPlan plan;
  plan.rounds = fixed_rounds_count(link_count, k, p, delta);
  plan.seconds =
      k * delay(model, packet_size(bits, theta, dim), p) * static_cast<double>(plan.rounds);
  return plan;
}

std::vector<double> simulate_until_success_times(std::size_t link_count, double p,
                                                 std::size_t iterations, double delay_seconds,
                                                 std::size_t replicas, std::uint64_t seed) {
  check_loss(p);
  std::vector<double> out(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(r));
    std::uint64_t rounds = 0;
    for (std::size_t k = 0; k < iterations; ++k) rounds += sample_retransmissions(link_count, p, rng);
    out[r] = delay_seconds * static_cast<double>(rounds);
  });
  return out;
}

std::vector<std::uint8_t> simulate_fixed_rounds_success(std::size_t link_count, double p,
                                                        std::size_t iterations,
                                                        std::uint64_t rounds,
                                                        std::size_t replicas,
                                                        std::uint64_t seed) {
  check_loss(p);
  std::vector<std::uint8_t> out(replicas);
  parallel_for(replicas, [&](std::size_t r) {
    std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(r));
    bool ok = true;
    for (std::size_t k = 0; k < iterations && ok; ++k) {
      ok = sample_retransmissions(link_count, p, rng) <= rounds;
    }
    out[r] = ok ? 1 : 0;
  });
  return out;
}

double mean(const std::vector<double>& sample) {
  if (sample.empty()) raise(Errc::EmptySample, "mean of an empty sample");
  return std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size());
}

Interval bootstrap_mean_ci(const std::vector<double>& sample, double level, std::size_t resamples,
                           std::uint64_t seed) {
  if (sample.empty()) raise(Errc::EmptySample, "bootstrap of an empty sample");
  if (!(level > 0.0 && level < 1.0)) raise(Errc::InvalidArgument, "level must lie in (0, 1)");
  if (resamples == 0) raise(Errc::EmptySample, "need at least one bootstrap resample");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) s += sample[pick(rng)];
    m = s / static_cast<double>(sample.size());
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  auto at = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(resamples - 1)));
    return means[std::min(idx, resamples - 1)];
  };
  return {at(tail), at(1.0 - tail)};
}

}  // namespace gridquant
