#include "ibo/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "ibo/error.hpp"
#include "ibo/parallel.hpp"
#include "ibo/rng.hpp"

namespace ibo {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

struct Branch {
    std::vector<std::size_t> bins;
    std::vector<double> cs, sn;
    std::size_t size() const { return bins.size(); }
};

struct Prepared {
    Branch neg, pos;
};

Prepared prepare(const ObservationSet& obs, const CandidateGrid& grid) {
    if (obs.empty()) throw EmptyObservations();
    obs.validate();
    Prepared p;
    for (const auto& o : obs.pairs) {
        const std::size_t bin = grid.nearest_bin(o.delta_r1);
        Branch& br = grid.tables().delta_r[bin] >= 0.0 ? p.pos : p.neg;
        br.bins.push_back(bin);
        br.cs.push_back(std::cos(o.theta2));
        br.sn.push_back(std::sin(o.theta2));
    }
    return p;
}

// Mode indices of one branch for every tau choice, with consecutive
// duplicates collapsed.
struct Variants {
    std::vector<std::vector<std::uint16_t>> modes;
    std::vector<std::size_t> of_tau;
};

Variants branch_variants(const CandidateGrid& grid, std::size_t c, const Branch& br, bool positive) {
    const auto& t = grid.tables();
    const std::size_t tc = grid.table_candidate(c);
    const std::size_t n_tau = grid.augmentation() == Augmentation::none ? 1 : grid.tau_values().size();
    Variants v;
    v.of_tau.resize(n_tau);
    std::vector<std::uint16_t> cur(br.size());
    for (std::size_t k = 0; k < n_tau; ++k) {
        const std::size_t combo = grid.augmentation() == Augmentation::split
                                      ? (positive ? k : k * grid.tau_values().size())
                                      : k;
        const auto [tm, tp] = grid.tau_pair(combo);
        const std::size_t ti = positive ? tp : tm;
        for (std::size_t i = 0; i < br.size(); ++i) cur[i] = static_cast<std::uint16_t>(t.mode_index(tc, br.bins[i], ti));
        if (v.modes.empty() || v.modes.back() != cur) v.modes.push_back(cur);
        v.of_tau[k] = v.modes.size() - 1;
    }
    return v;
}

// Component densities of one branch under one variant and gamma.
struct Densities {
    double unimodal_ll = 0.0;
    std::vector<double> a, b;
    double bound = 0.0;
};

double tangent_bound(std::span<const double> a, std::span<const double> b) {
    if (a.empty()) return 0.0;
    const double lo = em_w_floor, hi = 1.0 - em_w_floor;
    double w = 0.5;
    for (int it = 0; it < 3; ++it) {
        double g = 0.0, h = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            const double r = d / (w * a[i] + (1.0 - w) * b[i]);
            g += r;
            h -= r * r;
        }
        if (h == 0.0) break;
        w = std::clamp(w - g / h, lo, hi);
    }
    double f = 0.0, g = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double q = w * a[i] + (1.0 - w) * b[i];
        f += std::log(q);
        g += (a[i] - b[i]) / q;
    }
    // Concavity: f(x) <= f(w) + f'(w)(x - w) on [lo, hi].
    return f + std::max({g * (hi - w), g * (lo - w), 0.0});
}

void fill_densities(Densities& d, const std::vector<std::uint16_t>& modes, const Branch& br, const CurveTables& t,
                    const WrappedCauchyKernel& k, const std::vector<double>& cj, const std::vector<double>& sj,
                    bool with_bound) {
    d.unimodal_ll = 0.0;
    d.a.clear();
    d.b.clear();
    const int axis = t.axis_max();
    for (std::size_t i = 0; i < br.size(); ++i) {
        const int j = modes[i];
        const double same = br.cs[i] * cj[j] + br.sn[i] * sj[j];
        if (j == 0 || j == axis) {
            d.unimodal_ll += std::log(k(same));
        } else {
            d.a.push_back(k(br.cs[i] * cj[j] - br.sn[i] * sj[j]));
            d.b.push_back(k(same));
        }
    }
    d.bound = with_bound ? d.unimodal_ll + tangent_bound(d.a, d.b) : 0.0;
}

struct Engine {
    const CandidateGrid& grid;
    const Prepared& data;
    const EmOptions& em;
    std::size_t n_cand, n_gamma, n_tau;
    std::vector<double> cj, sj;

    Engine(const CandidateGrid& g, const Prepared& p, const EmOptions& e)
        : grid(g), data(p), em(e), n_cand(g.num_candidates()), n_gamma(g.num_gamma()),
          n_tau(g.augmentation() == Augmentation::none ? 1 : g.tau_values().size()) {
        for (double th : g.tables().theta_half) {
            cj.push_back(std::cos(th));
            sj.push_back(std::sin(th));
        }
        // Keep the pi endpoint exact.
        sj.back() = 0.0;
        cj.back() = -1.0;
    }

    std::pair<std::size_t, std::size_t> local_tau(std::size_t combo) const {
        if (grid.augmentation() == Augmentation::split) return {combo / n_tau, combo % n_tau};
        return {combo, combo};
    }

    struct CandidateState {
        Variants neg, pos;
        std::vector<Densities> dn, dp;
    };

    CandidateState candidate(std::size_t c) const {
        CandidateState s;
        s.neg = branch_variants(grid, c, data.neg, false);
        s.pos = branch_variants(grid, c, data.pos, true);
        s.dn.resize(s.neg.modes.size());
        s.dp.resize(s.pos.modes.size());
        return s;
    }

    void densities(CandidateState& s, std::size_t g, bool with_bound) const {
        const WrappedCauchyKernel k(grid.gamma()[g]);
        for (std::size_t v = 0; v < s.dn.size(); ++v)
            fill_densities(s.dn[v], s.neg.modes[v], data.neg, grid.tables(), k, cj, sj, with_bound);
        for (std::size_t v = 0; v < s.dp.size(); ++v)
            fill_densities(s.dp[v], s.pos.modes[v], data.pos, grid.tables(), k, cj, sj, with_bound);
    }

    EmResult exact(const Densities& n, const Densities& p) const {
        EmResult r = fit_weight_em(n.a, n.b, p.a, p.b, em);
        r.loglik += n.unimodal_ll + p.unimodal_ll;
        return r;
    }
};

double logsumexp(const std::vector<double>& v, double max) {
    double s = 0.0;
    for (double x : v)
        if (x > neg_inf) s += std::exp(x - max);
    return max + std::log(s);
}

void run_per_candidate(const Engine& eng, const FitOptions& options, FitResult& fit) {
    const CandidateGrid& grid = eng.grid;
    const std::size_t C = eng.n_cand, G = eng.n_gamma, T = eng.n_tau, K = grid.num_tau_combos();
    // Pass 1: per-branch upper bounds for every (candidate, gamma, tau).
    std::vector<double> ubn(C * G * T), ubp(C * G * T);
    parallel_for(C, [&](std::size_t c) {
        auto s = eng.candidate(c);
        for (std::size_t g = 0; g < G; ++g) {
            eng.densities(s, g, true);
            for (std::size_t t = 0; t < T; ++t) {
                ubn[(c * G + g) * T + t] = s.dn[s.neg.of_tau[t]].bound;
                ubp[(c * G + g) * T + t] = s.dp[s.pos.of_tau[t]].bound;
            }
        }
    });
    auto cell_bound = [&](std::size_t cg, std::size_t combo) {
        const auto [tn, tp] = eng.local_tau(combo);
        return ubn[cg * T + tn] + ubp[cg * T + tp];
    };
    std::vector<double> best_cg(C * G);
    for (std::size_t cg = 0; cg < C * G; ++cg) {
        double b = neg_inf;
        for (std::size_t k = 0; k < K; ++k) b = std::max(b, cell_bound(cg, k));
        best_cg[cg] = b;
    }

    double margin = options.screen_margin.value_or(36.0 + std::log(static_cast<double>(grid.num_cells())));
    if (std::isnan(margin) || margin < 0.0) throw InvalidArgument("screen margin must be nonnegative");
    double threshold = neg_inf;
    if (std::isfinite(margin)) {
        const std::size_t top = static_cast<std::size_t>(std::max_element(best_cg.begin(), best_cg.end()) - best_cg.begin());
        std::size_t top_k = 0;
        for (std::size_t k = 0; k < K; ++k)
            if (cell_bound(top, k) == best_cg[top]) {
                top_k = k;
                break;
            }
        auto s = eng.candidate(top / G);
        eng.densities(s, top % G, false);
        const auto [tn, tp] = eng.local_tau(top_k);
        threshold = eng.exact(s.dn[s.neg.of_tau[tn]], s.dp[s.pos.of_tau[tp]]).loglik - margin;
    }

    fit.loglik.assign(grid.num_cells(), neg_inf);
    std::vector<std::vector<std::pair<std::size_t, double>>> w_local(C);
    std::vector<std::size_t> n_exact(C, 0);
    parallel_for(C, [&](std::size_t c) {
        auto s = eng.candidate(c);
        const std::size_t Vp = s.dp.size();
        std::vector<EmResult> memo;
        std::vector<char> have;
        for (std::size_t g = 0; g < G; ++g) {
            const std::size_t cg = c * G + g;
            if (best_cg[cg] < threshold) {
                for (std::size_t k = 0; k < K; ++k) fit.loglik[grid.cell_index(c, k, g)] = cell_bound(cg, k);
                continue;
            }
            eng.densities(s, g, false);
            memo.assign(s.dn.size() * Vp, {});
            have.assign(s.dn.size() * Vp, 0);
            for (std::size_t k = 0; k < K; ++k) {
                const std::size_t cell = grid.cell_index(c, k, g);
                const double ub = cell_bound(cg, k);
                if (ub < threshold) {
                    fit.loglik[cell] = ub;
                    continue;
                }
                const auto [tn, tp] = eng.local_tau(k);
                const std::size_t vn = s.neg.of_tau[tn], vp = s.pos.of_tau[tp];
                const std::size_t key = vn * Vp + vp;
                if (!have[key]) {
                    memo[key] = eng.exact(s.dn[vn], s.dp[vp]);
                    have[key] = 1;
                }
                fit.loglik[cell] = memo[key].loglik;
                w_local[c].emplace_back(cell, memo[key].all_unimodal ? std::numeric_limits<double>::quiet_NaN()
                                                                     : memo[key].w);
                ++n_exact[c];
            }
        }
    });
    fit.w_exact.clear();
    for (auto& v : w_local) fit.w_exact.insert(fit.w_exact.end(), v.begin(), v.end());
    std::sort(fit.w_exact.begin(), fit.w_exact.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    fit.n_exact = std::accumulate(n_exact.begin(), n_exact.end(), std::size_t{0});
    fit.n_screened = grid.num_cells() - fit.n_exact;
}

void run_fixed_weight(const Engine& eng, double w, FitResult& fit) {
    const CandidateGrid& grid = eng.grid;
    const std::size_t C = eng.n_cand, G = eng.n_gamma, K = grid.num_tau_combos();
    fit.loglik.assign(grid.num_cells(), neg_inf);
    parallel_for(C, [&](std::size_t c) {
        auto s = eng.candidate(c);
        std::vector<double> fn(s.dn.size()), fp(s.dp.size());
        for (std::size_t g = 0; g < G; ++g) {
            eng.densities(s, g, false);
            for (std::size_t v = 0; v < fn.size(); ++v) fn[v] = s.dn[v].unimodal_ll + weight_loglik(s.dn[v].a, s.dn[v].b, w);
            for (std::size_t v = 0; v < fp.size(); ++v) fp[v] = s.dp[v].unimodal_ll + weight_loglik(s.dp[v].a, s.dp[v].b, w);
            for (std::size_t k = 0; k < K; ++k) {
                const auto [tn, tp] = eng.local_tau(k);
                fit.loglik[grid.cell_index(c, k, g)] = fn[s.neg.of_tau[tn]] + fp[s.pos.of_tau[tp]];
            }
        }
    });
    fit.w_exact.clear();
    fit.n_exact = grid.num_cells();
    fit.n_screened = 0;
}

// Greedy HPD over a (sorted descending) probability list; ties at the
// boundary are included.
std::size_t hpd_prefix(const std::vector<double>& sorted_probs, double mass) {
    double cum = 0.0;
    std::size_t n = 0;
    while (n < sorted_probs.size() && cum < mass) cum += sorted_probs[n++];
    while (n > 0 && n < sorted_probs.size() && sorted_probs[n] == sorted_probs[n - 1]) ++n;
    return n;
}

void assemble(FitResult& fit, const FitOptions& options) {
    const CandidateGrid& grid = *fit.grid;
    const double max_ll = *std::max_element(fit.loglik.begin(), fit.loglik.end());
    if (!std::isfinite(max_ll)) throw Error("likelihood is not finite on any cell");
    fit.log_norm = logsumexp(fit.loglik, max_ll);
    fit.log_evidence = fit.log_norm - std::log(static_cast<double>(grid.num_cells()));
    fit.map_cells.clear();
    for (std::size_t i = 0; i < fit.loglik.size(); ++i)
        if (fit.loglik[i] == max_ll) fit.map_cells.push_back(i);
    fit.train_loglik = max_ll;

    // Cells within 30 nats of the mode carry all but a negligible share.
    const double cut = max_ll - 30.0;
    std::vector<RankedCell> cand;
    for (std::size_t i = 0; i < fit.loglik.size(); ++i)
        if (fit.loglik[i] >= cut) cand.push_back({i, std::exp(fit.loglik[i] - fit.log_norm), 0.0});
    std::sort(cand.begin(), cand.end(), [](const RankedCell& a, const RankedCell& b) {
        return a.prob != b.prob ? a.prob > b.prob : a.cell < b.cell;
    });
    for (auto& r : cand) r.w = fit.w_hat(r.cell);
    std::vector<double> probs(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) probs[i] = cand[i].prob;
    fit.hpd_size = hpd_prefix(probs, options.hpd_mass);
    fit.hpd_mass = std::accumulate(probs.begin(), probs.begin() + fit.hpd_size, 0.0);
    fit.ranked = std::move(cand);

    const std::size_t n_curves = grid.num_curves();
    fit.curve_posterior.assign(n_curves, 0.0);
    for (const auto& r : fit.ranked) fit.curve_posterior[r.cell / grid.num_gamma()] += r.prob;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n_curves; ++i)
        if (fit.curve_posterior[i] > 0.0) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return fit.curve_posterior[a] != fit.curve_posterior[b] ? fit.curve_posterior[a] > fit.curve_posterior[b] : a < b;
    });
    std::vector<double> cprobs(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) cprobs[i] = fit.curve_posterior[order[i]];
    order.resize(hpd_prefix(cprobs, options.hpd_mass));
    std::sort(order.begin(), order.end());
    fit.hpd_curves = std::move(order);

    std::vector<std::size_t> curves;
    for (std::size_t i = 0; i < fit.hpd_size; ++i) curves.push_back(fit.ranked[i].cell / grid.num_gamma());
    std::sort(curves.begin(), curves.end());
    curves.erase(std::unique(curves.begin(), curves.end()), curves.end());
    const auto& t = grid.tables();
    fit.envelope.clear();
    for (std::size_t b = 0; b < t.num_bins(); ++b) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (auto cv : curves) {
            const double a = t.theta_half[grid.mode_index(cv / grid.num_tau_combos(), cv % grid.num_tau_combos(), b)];
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        fit.envelope.push_back({t.delta_r[b], lo, hi});
    }
}

}  // namespace

AcquisitionSpec FitResult::map_spec() const {
    const auto c = grid->cell(map_cell());
    return grid->spec(c.candidate, c.combo);
}

double FitResult::map_gamma() const { return grid->gamma()[grid->cell(map_cell()).gamma]; }

double FitResult::w_hat(std::size_t cell) const {
    if (weight_mode == WeightMode::global) return global_w;
    const auto it = std::lower_bound(w_exact.begin(), w_exact.end(), std::pair<std::size_t, double>{cell, neg_inf});
    if (it == w_exact.end() || it->first != cell || std::isnan(it->second)) return 0.5;
    return it->second;
}

double FitResult::entropy() const {
    double h = 0.0;
    for (double ll : loglik) {
        const double lp = ll - log_norm;
        if (lp > -700.0) h -= std::exp(lp) * lp;
    }
    return h;
}

bool FitResult::hpd_contains(std::size_t cell) const {
    for (std::size_t i = 0; i < hpd_size; ++i)
        if (ranked[i].cell == cell) return true;
    return false;
}

bool FitResult::hpd_contains_curve(std::size_t curve) const {
    return std::binary_search(hpd_curves.begin(), hpd_curves.end(), curve);
}

std::vector<ThetaInterval> FitResult::prediction_region(double delta_r1, double mass, int eval_grid) const {
    if (!(mass > 0.0 && mass <= 1.0)) throw InvalidArgument("mass must lie in (0, 1]");
    const auto& g = *grid;
    const auto& t = g.tables();
    const std::size_t bin = g.nearest_bin(delta_r1);
    const std::size_t nj = t.theta_half.size(), G = g.num_gamma();
    // Weight on the negative and positive component per (mode index, gamma).
    std::vector<double> wm(nj * G, 0.0), wp(nj * G, 0.0);
    for (const auto& r : ranked) {
        const auto c = g.cell(r.cell);
        const std::size_t j = static_cast<std::size_t>(g.mode_index(c.candidate, c.combo, bin));
        if (j == 0 || j + 1 == nj) {
            wp[j * G + c.gamma] += r.prob;
        } else {
            wm[j * G + c.gamma] += r.prob * r.w;
            wp[j * G + c.gamma] += r.prob * (1.0 - r.w);
        }
    }
    const double h = 2.0 * std::numbers::pi / eval_grid;
    std::vector<double> cell_mass(eval_grid, 0.0);
    for (std::size_t gi = 0; gi < G; ++gi) {
        const WrappedCauchyKernel k(g.gamma()[gi]);
        for (std::size_t j = 0; j < nj; ++j) {
            const double a = wm[j * G + gi], b = wp[j * G + gi];
            if (a == 0.0 && b == 0.0) continue;
            const double mode = t.theta_half[j];
            for (int i = 0; i < eval_grid; ++i) {
                const double th = -std::numbers::pi + (i + 0.5) * h;
                cell_mass[i] += (a * k(std::cos(th + mode)) + b * k(std::cos(th - mode))) * h;
            }
        }
    }
    const double total = std::accumulate(cell_mass.begin(), cell_mass.end(), 0.0);
    std::vector<int> order(eval_grid);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return cell_mass[a] != cell_mass[b] ? cell_mass[a] > cell_mass[b] : a < b;
    });
    std::vector<char> chosen(eval_grid, 0);
    double cum = 0.0;
    std::size_t n = 0;
    while (n < order.size() && cum < mass * total) {
        cum += cell_mass[order[n]];
        chosen[order[n++]] = 1;
    }
    // Mirror-equal cells at the cut are kept together.
    while (n > 0 && n < order.size() && std::abs(cell_mass[order[n]] - cell_mass[order[n - 1]]) <= 1e-14 * total)
        chosen[order[n++]] = 1;
    std::vector<ThetaInterval> out;
    for (int i = 0; i < eval_grid;) {
        if (!chosen[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < eval_grid && chosen[j + 1]) ++j;
        out.push_back({-std::numbers::pi + i * h, -std::numbers::pi + (j + 1) * h});
        i = j + 1;
    }
    if (!out.empty()) out.back().hi = std::min(out.back().hi, std::numbers::pi);
    return out;
}

std::vector<ThetaInterval> prediction_region(const FitResult& fit, double delta_r1, double mass) {
    return fit.prediction_region(delta_r1, mass);
}

FitResult posterior(const ObservationSet& obs, std::shared_ptr<const CandidateGrid> grid, const FitOptions& options) {
    if (!grid) throw InvalidArgument("null grid");
    if (!(options.hpd_mass > 0.0 && options.hpd_mass <= 1.0)) throw InvalidArgument("hpd mass must lie in (0, 1]");
    const Prepared data = prepare(obs, *grid);
    FitResult fit;
    fit.subject_id = obs.subject_id;
    fit.n_obs = obs.size();
    fit.grid = grid;
    fit.weight_mode = options.weight_mode;
    const Engine eng(*grid, data, options.em);
    run_per_candidate(eng, options, fit);
    const std::size_t map = static_cast<std::size_t>(std::max_element(fit.loglik.begin(), fit.loglik.end()) - fit.loglik.begin());
    fit.weight_mode = WeightMode::per_candidate;
    const auto it = std::lower_bound(fit.w_exact.begin(), fit.w_exact.end(), std::pair<std::size_t, double>{map, neg_inf});
    fit.map_w_identified = it != fit.w_exact.end() && it->first == map && !std::isnan(it->second);
    fit.map_w = fit.w_hat(map);
    if (options.weight_mode == WeightMode::global) {
        fit.global_w = fit.map_w;
        run_fixed_weight(eng, fit.global_w, fit);
        fit.weight_mode = WeightMode::global;
    }
    assemble(fit, options);
    fit.map_w = fit.w_hat(fit.map_cell());
    return fit;
}

FitResult posterior(const ObservationSet& obs, const CandidateGrid& grid, const FitOptions& options) {
    return posterior(obs, std::make_shared<const CandidateGrid>(grid), options);
}

double cell_loglik(const ObservationSet& obs, const CandidateGrid& grid, std::size_t cell, double w) {
    if (obs.empty()) throw EmptyObservations();
    const auto c = grid.cell(cell);
    MixtureModel model;
    model.gamma = grid.gamma()[c.gamma];
    model.w = w;
    double ll = 0.0;
    const auto& t = grid.tables();
    for (const auto& o : obs.pairs) {
        const std::size_t bin = grid.nearest_bin(o.delta_r1);
        const int j = grid.mode_index(c.candidate, c.combo, bin);
        const double th = t.theta_half[j];
        model.modes.angles = (j == 0 || j == t.axis_max()) ? std::vector<double>{th} : std::vector<double>{-th, th};
        ll += std::log(model.pdf(o.theta2));
    }
    return ll;
}

OutOfSample validate_out_of_sample(const ObservationSet& obs, std::shared_ptr<const CandidateGrid> grid, double split,
                                   std::uint64_t seed, const FitOptions& options) {
    if (obs.size() < 5) throw TooFewObservations("out-of-sample validation needs at least 5 observations");
    if (!(split > 0.0 && split <= 1.0)) throw InvalidArgument("split must lie in (0, 1]");
    std::vector<std::size_t> idx(obs.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = idx.size() - 1; i > 0; --i)
        std::swap(idx[i], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
    const std::size_t n_train = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(split * obs.size())), 1,
                                                        obs.size());
    ObservationSet train, test;
    train.subject_id = test.subject_id = obs.subject_id;
    for (std::size_t i = 0; i < idx.size(); ++i) (i < n_train ? train : test).pairs.push_back(obs.pairs[idx[i]]);
    OutOfSample out;
    out.n_train = train.size();
    out.n_test = test.size();
    out.fit = posterior(train, grid, options);
    out.train_ll = out.fit.train_loglik;
    if (!test.empty()) out.test_ll = cell_loglik(test, *grid, out.fit.map_cell(), out.fit.map_w);
    out.fit.test_loglik = out.test_ll;
    return out;
}

CompareTable model_compare(const std::vector<ObservationSet>& subjects, std::shared_ptr<const CandidateGrid> grid_u,
                           std::shared_ptr<const CandidateGrid> grid_tau, std::shared_ptr<const CandidateGrid> grid_taupm,
                           std::uint64_t seed, double split, const FitOptions& options) {
    CompareTable table;
    const std::shared_ptr<const CandidateGrid> grids[3] = {grid_u, grid_tau, grid_taupm};
    const Rng root(seed);
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        CompareRow row;
        row.subject_id = subjects[s].subject_id.empty() ? std::to_string(s) : subjects[s].subject_id;
        row.n_obs = subjects[s].size();
        const std::uint64_t split_seed = root.split(s).next();
        for (int m = 0; m < 3; ++m) {
            const auto r = validate_out_of_sample(subjects[s], grids[m], split, split_seed, options);
            if (!r.test_ll) throw InvalidArgument("model comparison needs a nonempty test split");
            row.test_ll[m] = *r.test_ll;
            table.total[m] += row.test_ll[m];
        }
        row.best = static_cast<int>(std::max_element(row.test_ll, row.test_ll + 3) - row.test_ll);
        table.rows.push_back(row);
    }
    table.best_total = static_cast<int>(std::max_element(table.total, table.total + 3) - table.total);
    return table;
}

}  // namespace ibo
