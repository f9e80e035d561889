#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ibo/acquisition.hpp"

namespace ibo {

/// Evenly spaced values with both endpoints exact.
std::vector<double> linspace(double lo, double hi, int n);

struct GridConfig {
    std::vector<Family> families{Family::pi, Family::ei, Family::ucb};
    int n_param = 61;
    double xi_max = 30.0;
    double p_lo = 0.5;
    double p_hi = 0.99;
    int n_gamma = 61;
    double gamma_lo = 0.01;
    double gamma_hi = 0.78539816339744831;
    int n_tau = 61;
    /// Keep every second tau value.
    bool coarse_tau = false;
    Augmentation augmentation = Augmentation::none;
    int theta_grid_size = 721;
};

/// Argmax tables for every base candidate and tau value. Expensive to build,
/// shared by every grid view over the same candidates.
struct CurveTables {
    TaskGeometry geometry;
    SurrogatePrior prior;
    double r0 = 93.0;
    std::vector<double> delta_r;
    /// theta_j = j * pi / m for j = 0..m.
    std::vector<double> theta_half;
    std::vector<AcquisitionSpec> candidates;
    std::vector<double> tau;
    std::vector<AcquisitionModel::Penalty> penalty;
    /// Half-grid argmax index for [candidate][bin][tau]; each bin uses the
    /// table matching the sign of its delta_r value.
    std::vector<std::uint16_t> index;

    std::size_t num_bins() const { return delta_r.size(); }
    std::size_t num_tau() const { return tau.size(); }
    int axis_max() const { return static_cast<int>(theta_half.size()) - 1; }
    int mode_index(std::size_t c, std::size_t bin, std::size_t tau_index) const {
        return index[(c * delta_r.size() + bin) * tau.size() + tau_index];
    }
};

std::shared_ptr<const CurveTables> build_curve_tables(const std::vector<AcquisitionSpec>& base_candidates,
                                                      const std::vector<double>& tau, double r0,
                                                      const TaskGeometry& geometry,
                                                      const std::vector<double>& delta_r_grid,
                                                      const SurrogatePrior& prior = {}, int theta_grid_size = 721);

/// A candidate grid: base candidates x tau combinations x gamma values.
class CandidateGrid {
public:
    CandidateGrid(std::shared_ptr<const CurveTables> tables, Augmentation augmentation, std::vector<double> gamma,
                  std::vector<std::size_t> tau_indices, std::vector<std::size_t> candidate_indices);

    const CurveTables& tables() const { return *tables_; }
    std::shared_ptr<const CurveTables> shared_tables() const { return tables_; }
    Augmentation augmentation() const { return augmentation_; }

    std::size_t num_candidates() const { return candidates_.size(); }
    std::size_t num_tau_combos() const { return num_combos_; }
    std::size_t num_gamma() const { return gamma_.size(); }
    std::size_t num_cells() const { return candidates_.size() * num_combos_ * gamma_.size(); }
    /// Number of distinct acquisition curves (candidates x tau combinations).
    std::size_t num_curves() const { return candidates_.size() * num_combos_; }

    const std::vector<double>& gamma() const { return gamma_; }
    const std::vector<double>& tau_values() const { return tau_; }

    struct Cell {
        std::size_t candidate, combo, gamma;
    };
    Cell cell(std::size_t index) const {
        const std::size_t g = index % gamma_.size();
        const std::size_t rest = index / gamma_.size();
        return {rest / num_combos_, rest % num_combos_, g};
    }
    std::size_t cell_index(std::size_t candidate, std::size_t combo, std::size_t g) const {
        return (candidate * num_combos_ + combo) * gamma_.size() + g;
    }

    /// Table index of candidate c (into CurveTables::candidates).
    std::size_t table_candidate(std::size_t c) const { return candidates_[c]; }
    /// Table tau indices (minus, plus) of a combination.
    std::pair<std::size_t, std::size_t> tau_pair(std::size_t combo) const;

    AcquisitionSpec spec(std::size_t c, std::size_t combo) const;
    /// Half-grid index of the argmax on a bin.
    int mode_index(std::size_t c, std::size_t combo, std::size_t bin) const;
    ArgmaxSet argmax(std::size_t c, std::size_t combo, std::size_t bin) const;
    AcquisitionCurve curve(std::size_t c, std::size_t combo) const;
    std::size_t nearest_bin(double delta_r) const { return nearest_index(tables_->delta_r, delta_r); }

    /// Locates the cell nearest to a spec and gamma (nearest parameter, tau and gamma values).
    std::size_t nearest_cell(const AcquisitionSpec& spec, double gamma) const;
    std::size_t nearest_candidate(const AcquisitionSpec& spec) const;
    std::size_t nearest_combo(const AcquisitionSpec& spec) const;

    CandidateGrid with_augmentation(Augmentation a) const;
    CandidateGrid restrict_families(const std::vector<Family>& families) const;

private:
    std::shared_ptr<const CurveTables> tables_;
    Augmentation augmentation_;
    std::vector<double> gamma_;
    std::vector<std::size_t> tau_idx_;
    std::vector<double> tau_;
    std::vector<std::size_t> candidates_;
    std::size_t num_combos_;
};

/// Base candidates in family order PI < EI < UCB.
std::vector<AcquisitionSpec> base_candidates(const GridConfig& config);

CandidateGrid precompute_grid(const GridConfig& config, double r0 = 93.0, const TaskGeometry& geometry = {},
                              const std::vector<double>& delta_r_grid = default_delta_r_grid(),
                              const SurrogatePrior& prior = {});

/// Grid over explicit candidates with a single gamma value; for tests and tools.
CandidateGrid make_grid(const std::vector<AcquisitionSpec>& base, const std::vector<double>& gamma,
                        const std::vector<double>& tau, Augmentation augmentation, double r0 = 93.0,
                        const TaskGeometry& geometry = {},
                        const std::vector<double>& delta_r_grid = default_delta_r_grid());

}  // namespace ibo
