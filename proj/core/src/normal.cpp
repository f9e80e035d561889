#include "ibo/normal.hpp"

#include <boost/math/special_functions/erf.hpp>

#include "ibo/error.hpp"

namespace ibo {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("normal_quantile needs p in (0, 1)");
    if (p == 0.5) return 0.0;
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double ei_kernel(double z) { return z * normal_cdf(z) + normal_pdf(z); }

double log_ei_kernel(double z) {
    if (z > -35.0) return std::log(ei_kernel(z));
    // phi(z) / z^2 * (1 - 3/z^2 + 15/z^4 - 105/z^6 + 945/z^8)
    const double u = 1.0 / (z * z);
    const double series = 1.0 - u * (3.0 - u * (15.0 - u * (105.0 - u * 945.0)));
    return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(u) + std::log(series);
}

}  // namespace ibo
