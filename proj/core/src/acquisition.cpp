#include "ibo/acquisition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "csv.hpp"
#include "ibo/error.hpp"
#include "ibo/normal.hpp"
#include "ibo/parallel.hpp"

namespace ibo {

namespace {
constexpr double tau_slack = 1e-9;
}

std::string to_string(Family f) {
    switch (f) {
        case Family::pi: return "pi";
        case Family::ei: return "ei";
        case Family::ucb: return "ucb";
    }
    return "?";
}

std::string to_string(Augmentation a) {
    switch (a) {
        case Augmentation::none: return "none";
        case Augmentation::symmetric: return "symmetric";
        case Augmentation::split: return "split";
    }
    return "?";
}

Family parse_family(const std::string& s) {
    if (s == "pi" || s == "PI") return Family::pi;
    if (s == "ei" || s == "EI") return Family::ei;
    if (s == "ucb" || s == "UCB") return Family::ucb;
    throw InvalidArgument("unknown acquisition family '" + s + "'");
}

Augmentation parse_augmentation(const std::string& s) {
    if (s == "none" || s == "u") return Augmentation::none;
    if (s == "symmetric" || s == "tau") return Augmentation::symmetric;
    if (s == "split" || s == "taupm") return Augmentation::split;
    throw InvalidArgument("unknown augmentation '" + s + "'");
}

void AcquisitionSpec::validate() const {
    if (!std::isfinite(param)) throw InvalidArgument("acquisition parameter not finite");
    if (family == Family::ucb) {
        if (param < 0.5 || param >= 1.0) throw InvalidArgument("UCB p must lie in [0.5, 1)");
    } else if (param < 0.0) {
        throw InvalidArgument("xi must be nonnegative");
    }
    const double half_pi = std::numbers::pi / 2 + 1e-12;
    if (tau_minus < 0.0 || tau_minus > half_pi || tau_plus < 0.0 || tau_plus > half_pi)
        throw InvalidArgument("tau must lie in [0, pi/2]");
    if (augmentation == Augmentation::symmetric && tau_minus != tau_plus)
        throw InvalidArgument("symmetric augmentation requires tau_minus == tau_plus");
}

namespace {

std::string shortest(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

}  // namespace

std::string describe(const AcquisitionSpec& spec) {
    std::string s = to_string(spec.family) + (spec.family == Family::ucb ? " p=" : " xi=") + shortest(spec.param);
    if (spec.augmentation == Augmentation::symmetric) s += " tau=" + shortest(spec.tau_plus);
    if (spec.augmentation == Augmentation::split)
        s += " tau-=" + shortest(spec.tau_minus) + " tau+=" + shortest(spec.tau_plus);
    return s;
}

double acquisition_value(Family family, double param, const PredictiveGaussian& pred, double incumbent) {
    switch (family) {
        case Family::pi: return normal_cdf((pred.mean - incumbent - param) / pred.sd);
        case Family::ei: {
            const double z = (pred.mean - incumbent - param) / pred.sd;
            return pred.sd * ei_kernel(z);
        }
        case Family::ucb: return pred.mean + normal_quantile(param) * pred.sd;
    }
    return 0.0;
}

double acquisition_score(Family family, double param, const PredictiveGaussian& pred, double incumbent) {
    switch (family) {
        case Family::pi: return (pred.mean - incumbent - param) / pred.sd;
        case Family::ei: return std::log(pred.sd) + log_ei_kernel((pred.mean - incumbent - param) / pred.sd);
        case Family::ucb: return pred.mean + normal_quantile(param) * pred.sd;
    }
    return 0.0;
}

double acquisition_value(const AcquisitionSpec& spec, double theta, const SurrogatePosterior& post,
                         const TaskGeometry& geometry) {
    return acquisition_value(spec.family, spec.param, predictive_on_boundary(post, theta, geometry), post.incumbent());
}

bool sufficiently_exploratory(const AcquisitionSpec& spec, double theta, double delta_r1) {
    if (spec.augmentation == Augmentation::none) return true;
    const double a = std::abs(theta);
    if (delta_r1 >= 0.0) return a >= spec.tau_plus - tau_slack;
    return a <= std::numbers::pi - spec.tau_minus + tau_slack;
}

double augmented_value(const AcquisitionSpec& spec, double theta, double delta_r1, const SurrogatePosterior& post,
                       const TaskGeometry& geometry, double penalty_value) {
    return sufficiently_exploratory(spec, theta, delta_r1) ? acquisition_value(spec, theta, post, geometry)
                                                           : penalty_value;
}

std::vector<double> theta_grid(int size) {
    if (size < 3) throw InvalidArgument("theta grid needs at least 3 points");
    const int m = size / 2;
    const double h = std::numbers::pi / m;
    std::vector<double> g;
    g.reserve(size);
    for (int k = (size % 2 == 1) ? -m : -m + 1; k <= m; ++k) g.push_back(k == m ? std::numbers::pi : k == -m ? -std::numbers::pi : k * h);
    return g;
}

std::vector<double> default_delta_r_grid() {
    std::vector<double> g(137);
    for (int i = 0; i < 137; ++i) g[i] = -34.0 + 0.5 * i;
    return g;
}

std::size_t nearest_index(const std::vector<double>& grid, double v) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), v);
    if (it == grid.begin()) return 0;
    if (it == grid.end()) return grid.size() - 1;
    const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    return (v - grid[hi - 1] <= grid[hi] - v) ? hi - 1 : hi;
}

AcquisitionModel::AcquisitionModel(TaskGeometry geometry, SurrogatePrior prior, double r0,
                                   std::vector<double> delta_r_grid, int theta_grid_size)
    : geometry_(geometry), prior_(prior), r0_(r0), delta_r_(std::move(delta_r_grid)), theta_size_(theta_grid_size) {
    geometry_.validate();
    prior_.validate();
    if (delta_r_.empty() || !std::is_sorted(delta_r_.begin(), delta_r_.end()) ||
        std::adjacent_find(delta_r_.begin(), delta_r_.end()) != delta_r_.end())
        throw InvalidArgument("delta_r grid must be strictly increasing");
    if (theta_grid_size < 3) throw InvalidArgument("theta grid needs at least 3 points");
    const int m = theta_grid_size / 2;
    theta_.resize(m + 1);
    for (int j = 0; j <= m; ++j) theta_[j] = j * (std::numbers::pi / m);
    theta_[m] = std::numbers::pi;
}

SurrogatePosterior AcquisitionModel::posterior(double delta_r1) const {
    return canonical_posterior(prior_, r0_, delta_r1, geometry_);
}

double AcquisitionModel::value(const AcquisitionSpec& spec, double theta, double delta_r1) const {
    return acquisition_value(spec, theta, posterior(delta_r1), geometry_);
}

AcquisitionModel::Penalty AcquisitionModel::penalty(const AcquisitionSpec& spec) const {
    const std::pair<int, double> key{static_cast<int>(spec.family), spec.param};
    {
        std::lock_guard lock(mutex_);
        if (auto it = penalty_cache_.find(key); it != penalty_cache_.end()) return it->second;
    }
    Penalty best{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    for (double dr : delta_r_) {
        const auto post = posterior(dr);
        const double inc = post.incumbent();
        for (double t : theta_) {
            const auto pred = predictive_on_boundary(post, t, geometry_);
            const double s = acquisition_score(spec.family, spec.param, pred, inc);
            if (s < best.score) best = {acquisition_value(spec.family, spec.param, pred, inc), s};
        }
    }
    std::lock_guard lock(mutex_);
    penalty_cache_.emplace(key, best);
    return best;
}

double AcquisitionModel::augmented_value(const AcquisitionSpec& spec, double theta, double delta_r1) const {
    if (sufficiently_exploratory(spec, theta, delta_r1)) return value(spec, theta, delta_r1);
    return penalty(spec).value;
}

ArgmaxSet AcquisitionModel::argmax(const AcquisitionSpec& spec, double delta_r1) const {
    spec.validate();
    const auto post = posterior(delta_r1);
    const double inc = post.incumbent();
    const bool augmented = spec.augmentation != Augmentation::none;
    const Penalty pen = augmented ? penalty(spec) : Penalty{0.0, 0.0};
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < theta_.size(); ++j) {
        double s = pen.score;
        if (!augmented || sufficiently_exploratory(spec, theta_[j], delta_r1))
            s = acquisition_score(spec.family, spec.param, predictive_on_boundary(post, theta_[j], geometry_), inc);
        if (s > best_score) {
            best_score = s;
            best = j;
        }
    }
    ArgmaxSet out;
    const double t = theta_[best];
    if (best == 0 || best + 1 == theta_.size())
        out.angles = {t};
    else
        out.angles = {-t, t};
    out.value = (!augmented || sufficiently_exploratory(spec, t, delta_r1))
                    ? acquisition_value(spec.family, spec.param, predictive_on_boundary(post, t, geometry_), inc)
                    : pen.value;
    return out;
}

AcquisitionCurve AcquisitionModel::curve(const AcquisitionSpec& spec) const {
    spec.validate();
    if (spec.augmentation != Augmentation::none) penalty(spec);
    AcquisitionCurve c;
    c.delta_r_grid = delta_r_;
    c.argmax.resize(delta_r_.size());
    parallel_for(delta_r_.size(), [&](std::size_t i) { c.argmax[i] = argmax(spec, delta_r_[i]); });
    return c;
}

ArgmaxSet argmax_over_theta(const AcquisitionSpec& spec, double delta_r1, const AcquisitionModel& model) {
    return model.argmax(spec, delta_r1);
}

AcquisitionCurve build_curve(const AcquisitionSpec& spec, double r0, const TaskGeometry& geometry,
                             const std::vector<double>& delta_r_grid, int theta_grid_size) {
    for (double dr : delta_r_grid)
        if (dr < -34.0 - 1e-12 || dr > 34.0 + 1e-12) throw InvalidArgument("delta_r grid must lie in [-34, 34]");
    return AcquisitionModel(geometry, {}, r0, delta_r_grid, theta_grid_size).curve(spec);
}

void write_curve_csv(std::ostream& out, const AcquisitionCurve& curve) {
    using detail::fmt17;
    out << "delta_r,theta_star_1,theta_star_2,acq_value\n";
    for (std::size_t i = 0; i < curve.delta_r_grid.size(); ++i) {
        const auto& a = curve.argmax[i];
        out << fmt17(curve.delta_r_grid[i]) << ',' << fmt17(a.angles[0]) << ',';
        if (a.bimodal()) out << fmt17(a.angles[1]);
        out << ',' << fmt17(a.value) << '\n';
    }
}

}  // namespace ibo
