#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ibo/grid.hpp"
#include "ibo/likelihood.hpp"
#include "ibo/observations.hpp"

namespace ibo {

enum class WeightMode {
    /// EM estimate of w for every cell.
    per_candidate,
    /// One w for all cells: the estimate at the per-candidate MAP cell.
    global
};

struct FitOptions {
    WeightMode weight_mode = WeightMode::per_candidate;
    /// Cells whose likelihood upper bound falls more than this many nats
    /// below the best exact cell keep the bound instead of an exact EM fit.
    /// Unset picks 36 + log(#cells); infinity evaluates every cell exactly.
    std::optional<double> screen_margin;
    double hpd_mass = 0.95;
    EmOptions em;
};

struct EnvelopeBand {
    double delta_r;
    double lo;
    double hi;
};

struct ThetaInterval {
    double lo;
    double hi;
};

struct RankedCell {
    std::size_t cell;
    double prob;
    double w;
};

class FitResult {
public:
    std::string subject_id;
    std::size_t n_obs = 0;
    std::shared_ptr<const CandidateGrid> grid;
    WeightMode weight_mode = WeightMode::per_candidate;

    /// Log-likelihood per cell (screened cells hold their upper bound).
    std::vector<double> loglik;
    double log_norm = 0.0;
    /// log of the marginal likelihood under the uniform prior.
    double log_evidence = 0.0;

    std::vector<std::size_t> map_cells;
    double map_w = 0.5;
    bool map_w_identified = true;
    double global_w = 0.5;

    /// Cells in descending posterior order covering all but a negligible tail.
    std::vector<RankedCell> ranked;
    /// Joint HPD set (prefix of `ranked`).
    std::size_t hpd_size = 0;
    double hpd_mass = 0.0;

    /// Posterior over (candidate, tau combination) with gamma marginalised,
    /// and its HPD set as curve indices.
    std::vector<double> curve_posterior;
    std::vector<std::size_t> hpd_curves;

    std::vector<EnvelopeBand> envelope;

    std::size_t n_exact = 0;
    std::size_t n_screened = 0;

    double train_loglik = 0.0;
    std::optional<double> test_loglik;

    double log_posterior(std::size_t cell) const { return loglik[cell] - log_norm; }
    std::size_t map_cell() const { return map_cells.front(); }
    AcquisitionSpec map_spec() const;
    double map_gamma() const;
    /// w estimate used for a cell.
    double w_hat(std::size_t cell) const;
    double entropy() const;
    bool hpd_contains(std::size_t cell) const;
    bool hpd_contains_curve(std::size_t curve) const;

    std::vector<ThetaInterval> prediction_region(double delta_r1, double mass = 0.95, int eval_grid = 1440) const;

    std::vector<std::pair<std::size_t, double>> w_exact;  // sorted by cell
};

FitResult posterior(const ObservationSet& obs, const CandidateGrid& grid, const FitOptions& options = {});
FitResult posterior(const ObservationSet& obs, std::shared_ptr<const CandidateGrid> grid,
                    const FitOptions& options = {});

std::vector<ThetaInterval> prediction_region(const FitResult& fit, double delta_r1, double mass = 0.95);

/// Mixture log-likelihood of obs under one cell with the given weight.
double cell_loglik(const ObservationSet& obs, const CandidateGrid& grid, std::size_t cell, double w);

struct OutOfSample {
    double train_ll = 0.0;
    std::optional<double> test_ll;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    FitResult fit;
};

OutOfSample validate_out_of_sample(const ObservationSet& obs, std::shared_ptr<const CandidateGrid> grid,
                                   double split, std::uint64_t seed, const FitOptions& options = {});

struct CompareRow {
    std::string subject_id;
    std::size_t n_obs = 0;
    double test_ll[3] = {0.0, 0.0, 0.0};
    int best = 0;
};

struct CompareTable {
    std::vector<CompareRow> rows;
    double total[3] = {0.0, 0.0, 0.0};
    int best_total = 0;
};

/// Test log-likelihood of each subject under u, u-tau and u-tau-pm grids,
/// all three fitted on the same seeded split.
CompareTable model_compare(const std::vector<ObservationSet>& subjects, std::shared_ptr<const CandidateGrid> grid_u,
                           std::shared_ptr<const CandidateGrid> grid_tau, std::shared_ptr<const CandidateGrid> grid_taupm,
                           std::uint64_t seed, double split = 0.8, const FitOptions& options = {});

}  // namespace ibo
