#pragma once

#include <span>
#include <vector>

#include "ibo/acquisition.hpp"
#include "ibo/observations.hpp"

namespace ibo {

struct WrappedCauchyParams {
    double mu = 0.0;
    double gamma = 0.25;
};

double wrapped_cauchy_pdf(double theta, WrappedCauchyParams params);

/// Precomputed constants of the closed form for one gamma:
/// pdf = scale / (a - b cos(theta - mu)).
struct WrappedCauchyKernel {
    double scale, a, b;
    explicit WrappedCauchyKernel(double gamma);
    double operator()(double cos_delta) const { return scale / (a - b * cos_delta); }
};

struct MixtureModel {
    ArgmaxSet modes;
    double gamma = 0.25;
    /// Weight of the component at the negative angle.
    double w = 0.5;

    double pdf(double theta) const;
};

double mixture_loglik(const ObservationSet& obs, const AcquisitionCurve& curve, double gamma, double w);

struct EmOptions {
    double tol = 1e-8;
    int max_iter = 500;
    double w0 = 0.5;
    bool record_trace = false;
};

struct EmResult {
    double w = 0.5;
    int iterations = 0;
    bool converged = false;
    /// No bimodal observation: w is unidentified and reported as 0.5.
    bool all_unimodal = false;
    /// Sum over bimodal observations of log(w h- + (1-w) h+).
    double loglik = 0.0;
    /// Log-likelihood before the first update and after each iteration.
    std::vector<double> trace;
};

inline constexpr double em_w_floor = 1e-6;

/// EM for the weight given the component densities of the bimodal
/// observations, split across up to two contiguous segments.
EmResult fit_weight_em(std::span<const double> h_minus_1, std::span<const double> h_plus_1,
                       std::span<const double> h_minus_2, std::span<const double> h_plus_2, const EmOptions& opts = {});

EmResult fit_weight_em(const ObservationSet& obs, const AcquisitionCurve& curve, double gamma,
                       const EmOptions& opts = {});

/// sum log(w a_i + (1-w) b_i).
double weight_loglik(std::span<const double> a, std::span<const double> b, double w);

}  // namespace ibo
