#include "ibo/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ibo/error.hpp"

namespace ibo {

WrappedCauchyKernel::WrappedCauchyKernel(double gamma) {
    const double rho = std::exp(-gamma);
    scale = (1.0 - rho * rho) / (2.0 * std::numbers::pi);
    a = 1.0 + rho * rho;
    b = 2.0 * rho;
}

double wrapped_cauchy_pdf(double theta, WrappedCauchyParams params) {
    if (!(params.gamma > 0.0)) throw InvalidArgument("wrapped Cauchy scale must be positive");
    return WrappedCauchyKernel(params.gamma)(std::cos(theta - params.mu));
}

double MixtureModel::pdf(double theta) const {
    const WrappedCauchyKernel k(gamma);
    if (!modes.bimodal()) return k(std::cos(theta - modes.angles[0]));
    return w * k(std::cos(theta - modes.angles[0])) + (1.0 - w) * k(std::cos(theta - modes.angles[1]));
}

namespace {

struct Components {
    std::vector<double> h_minus, h_plus;
    double unimodal_loglik = 0.0;
};

Components components(const ObservationSet& obs, const AcquisitionCurve& curve, double gamma) {
    if (obs.empty()) throw EmptyObservations();
    const WrappedCauchyKernel k(gamma);
    Components c;
    for (const auto& o : obs.pairs) {
        const auto& modes = curve.argmax[nearest_index(curve.delta_r_grid, o.delta_r1)];
        if (modes.bimodal()) {
            c.h_minus.push_back(k(std::cos(o.theta2 - modes.angles[0])));
            c.h_plus.push_back(k(std::cos(o.theta2 - modes.angles[1])));
        } else {
            c.unimodal_loglik += std::log(k(std::cos(o.theta2 - modes.angles[0])));
        }
    }
    return c;
}

}  // namespace

double weight_loglik(std::span<const double> a, std::span<const double> b, double w) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::log(w * a[i] + (1.0 - w) * b[i]);
    return s;
}

double mixture_loglik(const ObservationSet& obs, const AcquisitionCurve& curve, double gamma, double w) {
    const auto c = components(obs, curve, gamma);
    return c.unimodal_loglik + weight_loglik(c.h_minus, c.h_plus, w);
}

EmResult fit_weight_em(std::span<const double> a1, std::span<const double> b1, std::span<const double> a2,
                       std::span<const double> b2, const EmOptions& opts) {
    EmResult res;
    const std::size_t n = a1.size() + a2.size();
    if (n == 0) {
        res.all_unimodal = true;
        res.converged = true;
        return res;
    }
    auto loglik = [&](double w) { return weight_loglik(a1, b1, w) + weight_loglik(a2, b2, w); };
    double w = std::clamp(opts.w0, em_w_floor, 1.0 - em_w_floor);
    if (opts.record_trace) res.trace.push_back(loglik(w));
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int it = 1; it <= opts.max_iter; ++it) {
        double sum = 0.0;
        for (std::size_t i = 0; i < a1.size(); ++i) {
            const double p = w * a1[i];
            sum += p / (p + (1.0 - w) * b1[i]);
        }
        for (std::size_t i = 0; i < a2.size(); ++i) {
            const double p = w * a2[i];
            sum += p / (p + (1.0 - w) * b2[i]);
        }
        const double next = std::clamp(sum * inv_n, em_w_floor, 1.0 - em_w_floor);
        const double step = std::abs(next - w);
        w = next;
        res.iterations = it;
        if (opts.record_trace) res.trace.push_back(loglik(w));
        if (step < opts.tol) {
            res.converged = true;
            break;
        }
    }
    res.w = w;
    res.loglik = opts.record_trace ? res.trace.back() : loglik(w);
    return res;
}

EmResult fit_weight_em(const ObservationSet& obs, const AcquisitionCurve& curve, double gamma,
                       const EmOptions& opts) {
    const auto c = components(obs, curve, gamma);
    auto res = fit_weight_em(c.h_minus, c.h_plus, {}, {}, opts);
    res.loglik += c.unimodal_loglik;
    for (auto& v : res.trace) v += c.unimodal_loglik;
    return res;
}

}  // namespace ibo
