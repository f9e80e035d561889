#include "ibo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ibo/error.hpp"
#include "ibo/parallel.hpp"

namespace ibo {

namespace {
constexpr double tau_slack = 1e-9;
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw InvalidArgument("linspace needs n >= 1");
    if (n == 1) return {lo};
    std::vector<double> v(n);
    const double step = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) v[i] = lo + i * step;
    v.back() = hi;
    return v;
}

std::shared_ptr<const CurveTables> build_curve_tables(const std::vector<AcquisitionSpec>& base_candidates,
                                                      const std::vector<double>& tau, double r0,
                                                      const TaskGeometry& geometry,
                                                      const std::vector<double>& delta_r_grid,
                                                      const SurrogatePrior& prior, int theta_grid_size) {
    if (base_candidates.empty()) throw InvalidArgument("grid needs at least one candidate");
    if (tau.empty() || tau.front() != 0.0) throw InvalidArgument("tau grid must start at 0");
    auto t = std::make_shared<CurveTables>();
    t->geometry = geometry;
    t->prior = prior;
    t->r0 = r0;
    t->delta_r = delta_r_grid;
    t->tau = tau;
    for (const auto& s : base_candidates) {
        s.validate();
        t->candidates.push_back(s.base());
    }
    const int m = theta_grid_size / 2;
    if (m + 1 > std::numeric_limits<std::uint16_t>::max()) throw InvalidArgument("theta grid too large");
    t->theta_half.resize(m + 1);
    for (int j = 0; j <= m; ++j) t->theta_half[j] = j * (std::numbers::pi / m);
    t->theta_half[m] = std::numbers::pi;

    const std::size_t nb = delta_r_grid.size(), nt = tau.size(), nj = m + 1;
    // Allowed index range per tau value for each branch.
    std::vector<std::size_t> j_min(nt), j_max(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        std::size_t lo = 0;
        while (lo < nj && t->theta_half[lo] < tau[k] - tau_slack) ++lo;
        std::size_t hi = nj - 1;
        while (hi > 0 && t->theta_half[hi] > std::numbers::pi - tau[k] + tau_slack) --hi;
        j_min[k] = std::min(lo, nj - 1);
        j_max[k] = hi;
    }

    const AcquisitionModel model(geometry, prior, r0, delta_r_grid, theta_grid_size);
    const std::size_t nc = t->candidates.size();
    t->penalty.resize(nc);
    t->index.resize(nc * nb * nt);
    parallel_for(nc, [&](std::size_t c) {
        const AcquisitionSpec& spec = t->candidates[c];
        std::vector<double> score(nb * nj);
        AcquisitionModel::Penalty pen{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
        for (std::size_t b = 0; b < nb; ++b) {
            const auto post = model.posterior(delta_r_grid[b]);
            const double inc = post.incumbent();
            for (std::size_t j = 0; j < nj; ++j) {
                const auto pred = predictive_on_boundary(post, t->theta_half[j], geometry);
                const double s = acquisition_score(spec.family, spec.param, pred, inc);
                score[b * nj + j] = s;
                if (s < pen.score) pen = {acquisition_value(spec.family, spec.param, pred, inc), s};
            }
        }
        t->penalty[c] = pen;
        std::vector<std::size_t> best(nj);
        for (std::size_t b = 0; b < nb; ++b) {
            const double* s = &score[b * nj];
            std::uint16_t* out = &t->index[(c * nb + b) * nt];
            if (delta_r_grid[b] >= 0.0) {
                // best[j]: first maximiser over [j, m].
                best[nj - 1] = nj - 1;
                for (std::size_t j = nj - 1; j-- > 0;) best[j] = s[j] >= s[best[j + 1]] ? j : best[j + 1];
                for (std::size_t k = 0; k < nt; ++k) {
                    std::size_t jb = best[j_min[k]];
                    if (j_min[k] > 0 && s[jb] <= pen.score) jb = 0;
                    out[k] = static_cast<std::uint16_t>(jb);
                }
            } else {
                // best[j]: first maximiser over [0, j].
                best[0] = 0;
                for (std::size_t j = 1; j < nj; ++j) best[j] = s[j] > s[best[j - 1]] ? j : best[j - 1];
                for (std::size_t k = 0; k < nt; ++k) out[k] = static_cast<std::uint16_t>(best[j_max[k]]);
            }
        }
    });
    return t;
}

CandidateGrid::CandidateGrid(std::shared_ptr<const CurveTables> tables, Augmentation augmentation,
                             std::vector<double> gamma, std::vector<std::size_t> tau_indices,
                             std::vector<std::size_t> candidate_indices)
    : tables_(std::move(tables)),
      augmentation_(augmentation),
      gamma_(std::move(gamma)),
      tau_idx_(std::move(tau_indices)),
      candidates_(std::move(candidate_indices)) {
    if (gamma_.empty()) throw InvalidArgument("grid needs at least one gamma value");
    for (double g : gamma_)
        if (!(g > 0.0)) throw InvalidArgument("gamma values must be positive");
    if (augmentation_ == Augmentation::none) tau_idx_ = {0};
    if (tau_idx_.empty()) throw InvalidArgument("grid needs at least one tau value");
    for (auto i : tau_idx_) {
        if (i >= tables_->tau.size()) throw InvalidArgument("tau index out of range");
        tau_.push_back(tables_->tau[i]);
    }
    const std::size_t nt = tau_idx_.size();
    num_combos_ = augmentation_ == Augmentation::split ? nt * nt : nt;
}

std::pair<std::size_t, std::size_t> CandidateGrid::tau_pair(std::size_t combo) const {
    if (augmentation_ == Augmentation::split)
        return {tau_idx_[combo / tau_idx_.size()], tau_idx_[combo % tau_idx_.size()]};
    return {tau_idx_[combo], tau_idx_[combo]};
}

AcquisitionSpec CandidateGrid::spec(std::size_t c, std::size_t combo) const {
    AcquisitionSpec s = tables_->candidates[candidates_[c]];
    s.augmentation = augmentation_;
    if (augmentation_ != Augmentation::none) {
        const auto [tm, tp] = tau_pair(combo);
        s.tau_minus = tables_->tau[tm];
        s.tau_plus = tables_->tau[tp];
    }
    return s;
}

int CandidateGrid::mode_index(std::size_t c, std::size_t combo, std::size_t bin) const {
    const auto [tm, tp] = tau_pair(combo);
    return tables_->mode_index(candidates_[c], bin, tables_->delta_r[bin] >= 0.0 ? tp : tm);
}

ArgmaxSet CandidateGrid::argmax(std::size_t c, std::size_t combo, std::size_t bin) const {
    const int j = mode_index(c, combo, bin);
    const double t = tables_->theta_half[j];
    ArgmaxSet a;
    a.angles = (j == 0 || j == tables_->axis_max()) ? std::vector<double>{t} : std::vector<double>{-t, t};
    const AcquisitionSpec s = spec(c, combo);
    const auto post = canonical_posterior(tables_->prior, tables_->r0, tables_->delta_r[bin], tables_->geometry);
    a.value = sufficiently_exploratory(s, t, tables_->delta_r[bin]) ? acquisition_value(s, t, post, tables_->geometry)
                                                                    : tables_->penalty[candidates_[c]].value;
    return a;
}

AcquisitionCurve CandidateGrid::curve(std::size_t c, std::size_t combo) const {
    AcquisitionCurve out;
    out.delta_r_grid = tables_->delta_r;
    out.argmax.reserve(tables_->num_bins());
    for (std::size_t b = 0; b < tables_->num_bins(); ++b) out.argmax.push_back(argmax(c, combo, b));
    return out;
}

std::size_t CandidateGrid::nearest_candidate(const AcquisitionSpec& spec) const {
    std::size_t best = 0;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates_.size(); ++c) {
        const auto& s = tables_->candidates[candidates_[c]];
        if (s.family != spec.family) continue;
        const double d = std::abs(s.param - spec.param);
        if (d < dist) {
            dist = d;
            best = c;
        }
    }
    if (!std::isfinite(dist)) throw InvalidArgument("grid has no candidate of family " + to_string(spec.family));
    return best;
}

std::size_t CandidateGrid::nearest_combo(const AcquisitionSpec& spec) const {
    if (augmentation_ == Augmentation::none) return 0;
    const std::size_t tm = nearest_index(tau_, spec.tau_minus);
    const std::size_t tp = nearest_index(tau_, spec.tau_plus);
    if (augmentation_ == Augmentation::split) return tm * tau_.size() + tp;
    return tp;
}

std::size_t CandidateGrid::nearest_cell(const AcquisitionSpec& spec, double gamma) const {
    return cell_index(nearest_candidate(spec), nearest_combo(spec), nearest_index(gamma_, gamma));
}

CandidateGrid CandidateGrid::with_augmentation(Augmentation a) const {
    std::vector<std::size_t> taus(tau_idx_);
    if (augmentation_ == Augmentation::none) {
        taus.resize(tables_->tau.size());
        for (std::size_t i = 0; i < taus.size(); ++i) taus[i] = i;
    }
    return CandidateGrid(tables_, a, gamma_, taus, candidates_);
}

CandidateGrid CandidateGrid::restrict_families(const std::vector<Family>& families) const {
    std::vector<std::size_t> keep;
    for (auto c : candidates_)
        if (std::find(families.begin(), families.end(), tables_->candidates[c].family) != families.end())
            keep.push_back(c);
    if (keep.empty()) throw InvalidArgument("family restriction leaves no candidates");
    CandidateGrid g(*this);
    g.candidates_ = std::move(keep);
    return g;
}

std::vector<AcquisitionSpec> base_candidates(const GridConfig& config) {
    std::vector<AcquisitionSpec> out;
    for (Family f : {Family::pi, Family::ei, Family::ucb}) {
        if (std::find(config.families.begin(), config.families.end(), f) == config.families.end()) continue;
        const auto params = f == Family::ucb ? linspace(config.p_lo, config.p_hi, config.n_param)
                                             : linspace(0.0, config.xi_max, config.n_param);
        for (double p : params) out.push_back({f, p});
    }
    return out;
}

CandidateGrid precompute_grid(const GridConfig& config, double r0, const TaskGeometry& geometry,
                              const std::vector<double>& delta_r_grid, const SurrogatePrior& prior) {
    if (delta_r_grid.size() < 69) throw InvalidArgument("delta_r grid needs at least 69 points");
    const auto tau_all = linspace(0.0, std::numbers::pi / 2, config.n_tau);
    const auto tables = build_curve_tables(base_candidates(config), tau_all, r0, geometry, delta_r_grid, prior,
                                           config.theta_grid_size);
    std::vector<std::size_t> taus;
    for (std::size_t i = 0; i < tau_all.size(); i += config.coarse_tau ? 2 : 1) taus.push_back(i);
    std::vector<std::size_t> cands(tables->candidates.size());
    for (std::size_t i = 0; i < cands.size(); ++i) cands[i] = i;
    return CandidateGrid(tables, config.augmentation, linspace(config.gamma_lo, config.gamma_hi, config.n_gamma),
                         taus, cands);
}

CandidateGrid make_grid(const std::vector<AcquisitionSpec>& base, const std::vector<double>& gamma,
                        const std::vector<double>& tau, Augmentation augmentation, double r0,
                        const TaskGeometry& geometry, const std::vector<double>& delta_r_grid) {
    const auto tables = build_curve_tables(base, tau, r0, geometry, delta_r_grid);
    std::vector<std::size_t> taus(tau.size()), cands(base.size());
    for (std::size_t i = 0; i < taus.size(); ++i) taus[i] = i;
    for (std::size_t i = 0; i < cands.size(); ++i) cands[i] = i;
    return CandidateGrid(tables, augmentation, gamma, taus, cands);
}

}  // namespace ibo
