#pragma once

#include <cmath>
#include <numbers>

namespace ibo {

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * (0.5 * std::numbers::sqrt2)); }

double normal_quantile(double p);

/// z * Phi(z) + phi(z), the standardised expected improvement.
double ei_kernel(double z);

/// log(z * Phi(z) + phi(z)), accurate far into the left tail.
double log_ei_kernel(double z);

}  // namespace ibo
