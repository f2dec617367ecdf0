#pragma once

// Closed-form rate and budget formulas for the adaptive-grid quantized iteration.
// All logarithms are natural.

namespace gridquant {

/// K = max{1, 2 L_A L_C / sigma}. Throws Errc::InvalidSigma unless sigma in (0, 1).
double contraction_gain(double lip_a, double lip_c, double sigma);

/// Effective contraction K / (2^b - 1) + sigma. May exceed one.
double alpha(unsigned bits, double gain, double sigma);

/// Smallest b with alpha(b) < 1.
unsigned min_bits(double gain, double sigma);

/// Grid radius for iteration k: (K / L_A) * alpha^(k+1) * D.
double radius_schedule(unsigned long long k, double gain, double lip_a, double alpha_value,
                       double bound_d);

/// k_eps(b) = ln(D / eps) / (1 - alpha(b)), as a real threshold.
/// Throws Errc::Divergent when alpha(b) >= 1 and Errc::InvalidEps when eps <= 0.
double iterations_to_eps(unsigned bits, double gain, double sigma, double bound_d, double eps);

/// Same threshold for an explicit contraction factor.
double iterations_to_eps_alpha(double alpha_value, double bound_d, double eps);

/// B_eps(b) = b * k_eps(b), bits per dimension.
double total_bits(unsigned bits, double gain, double sigma, double bound_d, double eps);

/// argmin of total_bits over [min_bits, b_max], ties resolved to the smaller b.
unsigned optimal_bits(double gain, double sigma, double bound_d, double eps, unsigned b_max);

}  // namespace gridquant
