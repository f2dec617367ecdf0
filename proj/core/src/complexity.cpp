#include "gridquant/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gridquant/error.hpp"

namespace gridquant {

namespace {

double levels(unsigned bits) { return std::ldexp(1.0, static_cast<int>(bits)) - 1.0; }

void check_sigma(double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) {
    std::ostringstream msg;
    msg << "contraction factor " << sigma << " outside (0, 1)";
    raise(Errc::InvalidSigma, msg.str());
  }
}

}  // namespace

double contraction_gain(double lip_a, double lip_c, double sigma) {
  check_sigma(sigma);
  if (lip_a < 0.0 || lip_c < 0.0) raise(Errc::InvalidArgument, "Lipschitz constants must be >= 0");
  return std::max(1.0, 2.0 * lip_a * lip_c / sigma);
}

double alpha(unsigned bits, double gain, double sigma) {
  if (bits < 1) raise(Errc::InvalidArgument, "bits must be >= 1");
  return gain / levels(bits) + sigma;
}

unsigned min_bits(double gain, double sigma) {
  check_sigma(sigma);
  for (unsigned b = 1; b <= 64; ++b) {
    if (alpha(b, gain, sigma) < 1.0) return b;
  }
  raise(Errc::Divergent, "no bit width up to 64 yields alpha < 1");
}

double radius_schedule(unsigned long long k, double gain, double lip_a, double alpha_value,
                       double bound_d) {
  if (!(lip_a > 0.0)) raise(Errc::InvalidArgument, "L_A must be positive");
  return gain / lip_a * std::pow(alpha_value, static_cast<double>(k) + 1.0) * bound_d;
}

double iterations_to_eps_alpha(double alpha_value, double bound_d, double eps) {
  if (!(eps > 0.0)) raise(Errc::InvalidEps, "accuracy target must be positive");
  if (!(alpha_value < 1.0)) {
    std::ostringstream msg;
    msg << "alpha = " << alpha_value << " >= 1, no convergence guarantee";
    raise(Errc::Divergent, msg.str());
  }
  return std::max(0.0, std::log(bound_d / eps)) / (1.0 - alpha_value);
}

double iterations_to_eps(unsigned bits, double gain, double sigma, double bound_d, double eps) {
  return iterations_to_eps_alpha(alpha(bits, gain, sigma), bound_d, eps);
}

double total_bits(unsigned bits, double gain, double sigma, double bound_d, double eps) {
  return static_cast<double>(bits) * iterations_to_eps(bits, gain, sigma, bound_d, eps);
}

unsigned optimal_bits(double gain, double sigma, double bound_d, double eps, unsigned b_max) {
  const unsigned b_min = min_bits(gain, sigma);
  if (b_max < b_min) {
    std::ostringstream msg;
    msg << "b_max = " << b_max << " below min_bits = " << b_min;
    raise(Errc::EmptyRange, msg.str());
  }
  unsigned best = b_min;
  double best_bits = std::numeric_limits<double>::infinity();
  for (unsigned b = b_min; b <= b_max; ++b) {
    const double total = total_bits(b, gain, sigma, bound_d, eps);
    if (total < best_bits) {
      best_bits = total;
      best = b;
    }
  }
  return best;
}

}  // namespace gridquant
