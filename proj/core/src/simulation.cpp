#include "ibo/simulation.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>
#include <ostream>
#include <tuple>

#include "csv.hpp"
#include "ibo/error.hpp"
#include "ibo/parallel.hpp"

namespace ibo {

void SimConfig::validate() const {
    truth.validate();
    if (n_obs < 0) throw InvalidArgument("n_obs must be nonnegative");
    if (n_reps < 0) throw InvalidArgument("n_reps must be nonnegative");
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("w must lie in [0, 1]");
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    if (!(delta_r_lo <= delta_r_hi) || delta_r_lo < -max_abs_delta_r || delta_r_hi > max_abs_delta_r)
        throw InvalidArgument("delta_r range must lie in [-34, 34]");
}

double sample_theta(const ArgmaxSet& modes, double w, double gamma, Rng& rng) {
    double mode = modes.angles.back();
    if (modes.bimodal() && rng.bernoulli(w)) mode = modes.angles.front();
    if (gamma == 0.0) return mode;
    // A linear Cauchy draw wrapped onto the circle is wrapped Cauchy.
    return wrap_angle(mode + gamma * std::tan(std::numbers::pi * (rng.uniform() - 0.5)));
}

ObservationSet generate_observations(const SimConfig& config, const AcquisitionModel& model, Rng& rng) {
    config.validate();
    ObservationSet obs;
    obs.pairs.reserve(config.n_obs);
    for (int i = 0; i < config.n_obs; ++i) {
        const double dr = rng.uniform(config.delta_r_lo, config.delta_r_hi);
        const ArgmaxSet modes = model.argmax(config.truth, dr);
        obs.pairs.push_back({dr, sample_theta(modes, config.w, config.gamma, rng)});
    }
    return obs;
}

ObservationSet generate_observations(const SimConfig& config, const AcquisitionModel& model) {
    Rng rng(config.seed);
    return generate_observations(config, model, rng);
}

namespace {

std::pair<double, double> clopper_pearson(int x, int n, double alpha = 0.05) {
    if (n == 0) return {0.0, 1.0};
    const double lo = x == 0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1, alpha / 2);
    const double hi = x == n ? 1.0 : boost::math::ibeta_inv(x + 1, n - x, 1 - alpha / 2);
    return {lo, hi};
}

CoverageRow make_row(const std::string& family, const SimConfig& cfg, int covered) {
    CoverageRow row;
    row.family = family;
    row.param = cfg.truth.param;
    row.n_obs = cfg.n_obs;
    row.n_reps = cfg.n_reps;
    row.covered = covered;
    row.coverage = cfg.n_reps > 0 ? static_cast<double>(covered) / cfg.n_reps : 0.0;
    std::tie(row.ci_low, row.ci_high) = clopper_pearson(covered, cfg.n_reps);
    return row;
}

AcquisitionModel model_for(const CandidateGrid& grid) {
    const auto& t = grid.tables();
    return AcquisitionModel(t.geometry, t.prior, t.r0, t.delta_r, static_cast<int>(t.theta_half.size() - 1) * 2 + 1);
}

// Runs fn(rep, fit) over every replication of a config in parallel.
template <class Fn>
void replicate(const SimConfig& cfg, const AcquisitionModel& model, const std::shared_ptr<const CandidateGrid>& grid,
               const FitOptions& options, Fn&& fn) {
    parallel_for(static_cast<std::size_t>(cfg.n_reps), [&](std::size_t rep) {
        Rng rng = Rng(cfg.seed).split(rep);
        const auto obs = generate_observations(cfg, model, rng);
        fn(rep, posterior(obs, grid, options));
    });
}

}  // namespace

CoverageReport coverage_study(const std::vector<SimConfig>& configs, const CandidateGrid& grid,
                              const FitOptions& options) {
    CoverageReport report;
    const AcquisitionModel model = model_for(grid);
    for (const auto& cfg : configs) {
        cfg.validate();
        const auto g = std::make_shared<const CandidateGrid>(grid.restrict_families(cfg.inference_families));
        const std::size_t truth_cell = g->nearest_cell(cfg.truth, cfg.gamma);
        std::vector<char> hit(cfg.n_reps, 0);
        replicate(cfg, model, g, options,
                  [&](std::size_t rep, const FitResult& fit) { hit[rep] = fit.hpd_contains(truth_cell); });
        report.rows.push_back(make_row(to_string(cfg.truth.family), cfg, static_cast<int>(std::count(hit.begin(), hit.end(), 1))));
    }
    return report;
}

CoverageReport omitted_truth_study(const std::vector<SimConfig>& configs, const CandidateGrid& grid,
                                   const FitOptions& options) {
    CoverageReport report;
    const AcquisitionModel model = model_for(grid);
    for (const auto& cfg : configs) {
        cfg.validate();
        if (std::find(cfg.inference_families.begin(), cfg.inference_families.end(), cfg.truth.family) !=
            cfg.inference_families.end())
            throw InvalidArgument("omitted-truth study needs the true family excluded from inference");
        const auto g = std::make_shared<const CandidateGrid>(grid.restrict_families(cfg.inference_families));
        const auto& fams = cfg.inference_families;
        std::vector<char> hit(cfg.n_reps * fams.size(), 0);
        replicate(cfg, model, g, options, [&](std::size_t rep, const FitResult& fit) {
            for (std::size_t i = 0; i < fit.hpd_size; ++i) {
                const std::size_t curve = fit.ranked[i].cell / g->num_gamma();
                const Family f = g->tables().candidates[g->table_candidate(curve / g->num_tau_combos())].family;
                for (std::size_t i = 0; i < fams.size(); ++i)
                    if (fams[i] == f) hit[rep * fams.size() + i] = 1;
            }
        });
        for (std::size_t i = 0; i < fams.size(); ++i) {
            int covered = 0;
            for (int rep = 0; rep < cfg.n_reps; ++rep) covered += hit[rep * fams.size() + i];
            report.rows.push_back(make_row(to_string(cfg.truth.family) + ">" + to_string(fams[i]), cfg, covered));
        }
    }
    return report;
}

void write_coverage_csv(std::ostream& out, const CoverageReport& report) {
    using detail::fmt17;
    out << "family,param,n_obs,coverage,n_reps,ci_low,ci_high\n";
    for (const auto& r : report.rows)
        out << r.family << ',' << fmt17(r.param) << ',' << r.n_obs << ',' << fmt17(r.coverage) << ',' << r.n_reps
            << ',' << fmt17(r.ci_low) << ',' << fmt17(r.ci_high) << '\n';
}

double move3_direction(const AcquisitionSpec& spec, const Move3Case& c, const SurrogatePrior& prior,
                       const TaskGeometry& geometry, int theta_grid_size) {
    const Point2 d1 = c.moves[1] - c.moves[0], d2 = c.moves[2] - c.moves[1];
    const double cross = d1.x * d2.y - d1.y * d2.x;
    if (std::abs(cross) <= 1e-9 * d1.norm() * d2.norm()) throw CollinearMoves();
    const auto post = condition_on_moves(prior, std::span<const Point2>(c.moves, 3), std::span<const double>(c.rewards, 3));
    const double inc = post.incumbent();
    const Point2 base = c.moves[2] - c.moves[0];
    double best = -std::numeric_limits<double>::infinity(), best_phi = 0.0;
    for (double phi : theta_grid(theta_grid_size)) {
        const auto pred = predictive_at(post, base + geometry.click_radius * unit(phi));
        const double s = acquisition_score(spec.family, spec.param, pred, inc);
        if (s > best) {
            best = s;
            best_phi = phi;
        }
    }
    return best_phi;
}

namespace {

constexpr std::size_t max_move3_redraws = 10000;

}  // namespace

Move3Summary move3_gradient_check(const AcquisitionSpec& spec, const TaskGeometry& geometry, std::size_t n_rounds,
                                  std::uint64_t seed, const Move3Options& options) {
    spec.validate();
    if (spec.augmentation != Augmentation::none) throw InvalidArgument("move-3 check takes an unaugmented spec");
    const AcquisitionModel model(geometry);
    const double c = geometry.click_radius;
    std::vector<double> err(n_rounds);
    std::vector<std::size_t> redraws(n_rounds, 0);
    parallel_for(n_rounds, [&](std::size_t r) {
        Rng rng = Rng(seed).split(r);
        while (true) {
            const Round round = new_round(geometry, rng);
            const double d = distance(geometry.center, round.hotspot);
            const double phi1 = rng.angle();
            const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
            if (d < options.min_distance_clicks * c || d > options.max_distance_clicks * c) continue;
            Move3Case mc;
            mc.hotspot = round.hotspot;
            const Point2 toward = unit((round.hotspot - geometry.center).angle());
            auto reward = [&](Point2 m) {
                if (options.reward == RewardModel::cone) return round.reward_at(m);
                const Point2 rel = m - geometry.center;
                return round.r0 + round.k * (rel.x * toward.x + rel.y * toward.y);
            };
            mc.moves[0] = geometry.center;
            mc.moves[1] = geometry.center + c * unit(phi1);
            mc.rewards[0] = reward(mc.moves[0]);
            mc.rewards[1] = reward(mc.moves[1]);
            const ArgmaxSet modes = model.argmax(spec, mc.rewards[1] - mc.rewards[0]);
            if (!modes.bimodal() || round.k == 0.0) {
                if (++redraws[r] > max_move3_redraws)
                    throw InvalidArgument("spec gives no off-axis move 2: " + describe(spec));
                continue;
            }
            mc.moves[2] = mc.moves[1] + c * unit(phi1 + sign * modes.magnitude());
            mc.rewards[2] = reward(mc.moves[2]);
            const double phi3 = move3_direction(spec, mc, model.prior(), geometry, options.theta_grid_size);
            const double truth = options.reward == RewardModel::cone ? (round.hotspot - mc.moves[2]).angle() : toward.angle();
            err[r] = std::abs(wrap_angle(phi3 - truth));
            break;
        }
    });
    Move3Summary s;
    s.n_rounds = n_rounds;
    for (std::size_t r = 0; r < n_rounds; ++r) {
        s.mean_error += err[r];
        s.max_error = std::max(s.max_error, err[r]);
        s.redrawn += redraws[r];
    }
    if (n_rounds > 0) s.mean_error /= static_cast<double>(n_rounds);
    return s;
}

}  // namespace ibo
