#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ibo/acquisition.hpp"
#include "ibo/inference.hpp"
#include "ibo/observations.hpp"
#include "ibo/rng.hpp"

namespace ibo {

struct SimConfig {
    AcquisitionSpec truth;
    int n_obs = 100;
    double w = 0.5;
    double gamma = 0.25;
    int n_reps = 200;
    std::uint64_t seed = 1;
    std::vector<Family> inference_families{Family::pi, Family::ei, Family::ucb};
    double delta_r_lo = -max_abs_delta_r;
    double delta_r_hi = max_abs_delta_r;

    void validate() const;
};

/// Draws theta from the wrapped Cauchy mixture at the given modes.
double sample_theta(const ArgmaxSet& modes, double w, double gamma, Rng& rng);

ObservationSet generate_observations(const SimConfig& config, const AcquisitionModel& model, Rng& rng);
ObservationSet generate_observations(const SimConfig& config, const AcquisitionModel& model);

struct CoverageRow {
    std::string family;
    double param = 0.0;
    int n_obs = 0;
    int n_reps = 0;
    int covered = 0;
    double coverage = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

struct CoverageReport {
    std::vector<CoverageRow> rows;
};

/// Share of replications whose 95% HPD cell set holds the grid cell nearest
/// to the true (spec, gamma).
CoverageReport coverage_study(const std::vector<SimConfig>& configs, const CandidateGrid& grid,
                              const FitOptions& options = {});

/// For each family left in the inference grid, share of replications whose
/// HPD cell set holds at least one of its cells. Row family is "truth>competitor".
CoverageReport omitted_truth_study(const std::vector<SimConfig>& configs, const CandidateGrid& grid,
                                   const FitOptions& options = {});

void write_coverage_csv(std::ostream& out, const CoverageReport& report);

enum class RewardModel { cone, plane };

struct Move3Options {
    double min_distance_clicks = 10.0;
    double max_distance_clicks = std::numeric_limits<double>::infinity();
    RewardModel reward = RewardModel::cone;
    int theta_grid_size = 721;
};

struct Move3Summary {
    std::size_t n_rounds = 0;
    double mean_error = 0.0;
    double max_error = 0.0;
    std::size_t redrawn = 0;
};

/// Moves 0-2 of a round and the move-3 acquisition argmax around move 2.
struct Move3Case {
    Point2 hotspot;
    Point2 moves[3];
    double rewards[3];
};

/// Move-3 argmax direction (absolute angle) after conditioning on three
/// moves; throws CollinearMoves when move 2 lies on the move-1 line.
double move3_direction(const AcquisitionSpec& spec, const Move3Case& c, const SurrogatePrior& prior,
                       const TaskGeometry& geometry, int theta_grid_size = 721);

/// Move 2 follows the candidate's own move-2 argmax; rounds where that argmax is
/// on the move-1 axis are redrawn, and a spec that never leaves the axis
/// raises InvalidArgument.
Move3Summary move3_gradient_check(const AcquisitionSpec& spec, const TaskGeometry& geometry, std::size_t n_rounds,
                                  std::uint64_t seed, const Move3Options& options = {});

}  // namespace ibo
