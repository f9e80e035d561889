#pragma once

// Independent reference implementations used as test oracles.

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr long double pi_l = 3.141592653589793238462643383279502884L;

/// Linear-Cauchy series wrapped onto the circle, |k| <= kmax.
inline long double wrapped_series(double theta, double mu, double gamma, int kmax) {
    long double s = 0.0L;
    for (int k = -kmax; k <= kmax; ++k) {
        const long double d = static_cast<long double>(theta) - mu + 2.0L * pi_l * k;
        s += gamma / (pi_l * (static_cast<long double>(gamma) * gamma + d * d));
    }
    return s;
}

/// Series with |k| <= kmax plus the integral of the remaining terms from
/// kmax + 1/2 outward on both sides (midpoint rule; error far below 1e-12
/// once kmax is in the hundreds).
inline long double wrapped_series_with_tail(double theta, double mu, double gamma, int kmax) {
    const long double x = static_cast<long double>(theta) - mu;
    const long double a = kmax + 0.5L;
    auto upper = [&](long double off) {
        return (pi_l / 2 - std::atan((off + 2.0L * pi_l * a) / gamma)) / (2.0L * pi_l * pi_l);
    };
    return wrapped_series(theta, mu, gamma, kmax) + upper(x) + upper(-x);
}

struct Frame {
    double c = 20.4, sigma_s = 0.01, sigma_beta = 10.0, r0 = 93.0;
};

/// Predictive mean and sd at angle theta on the click circle after one
/// move of length c along +x with reward change dr.
inline void predictive(const Frame& f, double dr, long double theta, long double& mean, long double& sd) {
    const long double s2 = static_cast<long double>(f.sigma_s) * f.sigma_s;
    const long double b2 = static_cast<long double>(f.sigma_beta) * f.sigma_beta;
    const long double prec_x = f.c * f.c / s2 + 1.0L / b2;
    const long double mu_x = (f.c * dr / s2) / prec_x;
    const long double cs = std::cos(theta), sn = std::sin(theta);
    mean = f.r0 + f.c * cs * mu_x;
    sd = std::sqrt(s2 + f.c * f.c * (cs * cs / prec_x + sn * sn * b2));
}

enum class Fam { pi, ei, ucb };

/// PI is returned on the log scale, which preserves its ordering.
inline long double value(Fam fam, double param, long double mean, long double sd, long double inc) {
    const long double d = mean - inc - param;
    const long double z = d / sd;
    const long double cdf = 0.5L * std::erfc(-z / std::sqrt(2.0L));
    switch (fam) {
        // log PI; the raw probability rounds to 1 long before the peak.
        case Fam::pi: return z > 0 ? std::log1p(-0.5L * std::erfc(z / std::sqrt(2.0L))) : std::log(cdf);
        case Fam::ei: return d * cdf + sd * std::exp(-0.5L * z * z) / std::sqrt(2.0L * pi_l);
        case Fam::ucb: {
            const double q = boost::math::quantile(boost::math::normal(), param);
            return mean + q * sd;
        }
    }
    return 0.0L;
}

struct Query {
    Fam fam = Fam::ucb;
    double param = 0.5;
    double tau_minus = 0.0, tau_plus = 0.0;
    bool augmented = false;
};

inline bool exploratory(const Query& q, long double a, double dr) {
    if (!q.augmented) return true;
    return dr >= 0.0 ? a >= q.tau_plus - 1e-9 : a <= pi_l - q.tau_minus + 1e-9;
}

/// Global minimum of the base acquisition over dr_grid x a half grid of
/// the given resolution.
inline long double penalty(const Frame& f, const Query& q, const std::vector<double>& dr_grid, int half) {
    long double best = INFINITY;
    for (double dr : dr_grid) {
        const long double inc = dr > 0 ? f.r0 + dr : f.r0;
        for (int j = 0; j <= half; ++j) {
            long double m, s;
            predictive(f, dr, pi_l * j / half, m, s);
            best = std::min(best, value(q.fam, q.param, m, s, inc));
        }
    }
    return best;
}

/// |theta*| on a dense half grid, first maximum in increasing |theta|.
inline double argmax_abs(const Frame& f, const Query& q, double dr, long double pen, int half = 7200) {
    const long double inc = dr > 0 ? f.r0 + dr : f.r0;
    long double best = -INFINITY;
    int arg = 0;
    for (int j = 0; j <= half; ++j) {
        const long double a = pi_l * j / half;
        long double v;
        if (exploratory(q, a, dr)) {
            long double m, s;
            predictive(f, dr, a, m, s);
            v = value(q.fam, q.param, m, s, inc);
        } else {
            v = pen;
        }
        if (v > best) {
            best = v;
            arg = j;
        }
    }
    return static_cast<double>(pi_l * arg / half);
}

}  // namespace oracle
