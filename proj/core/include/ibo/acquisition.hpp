#pragma once

#include <iosfwd>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "ibo/surrogate.hpp"
#include "ibo/task.hpp"

namespace ibo {

enum class Family { pi, ei, ucb };
enum class Augmentation { none, symmetric, split };

std::string to_string(Family f);
std::string to_string(Augmentation a);
Family parse_family(const std::string& s);
Augmentation parse_augmentation(const std::string& s);

struct AcquisitionSpec {
    Family family = Family::ucb;
    /// xi for PI and EI, p for UCB.
    double param = 0.5;
    double tau_minus = 0.0;
    double tau_plus = 0.0;
    Augmentation augmentation = Augmentation::none;

    void validate() const;
    AcquisitionSpec base() const { return {family, param, 0.0, 0.0, Augmentation::none}; }
    friend bool operator==(const AcquisitionSpec&, const AcquisitionSpec&) = default;
};

std::string describe(const AcquisitionSpec& spec);

struct ArgmaxSet {
    /// One axis angle (0 or pi) or the mirrored pair {-t, t}, ascending.
    std::vector<double> angles;
    double value = 0.0;

    bool bimodal() const { return angles.size() == 2; }
    /// |theta*|.
    double magnitude() const { return std::abs(angles.back()); }
};

struct AcquisitionCurve {
    std::vector<double> delta_r_grid;
    std::vector<ArgmaxSet> argmax;
};

/// Acquisition value and a strictly increasing transform of it that stays
/// finite where the value itself underflows (PI: z, EI: log EI, UCB: value).
double acquisition_value(Family family, double param, const PredictiveGaussian& pred, double incumbent);
double acquisition_score(Family family, double param, const PredictiveGaussian& pred, double incumbent);

double acquisition_value(const AcquisitionSpec& spec, double theta, const SurrogatePosterior& post,
                         const TaskGeometry& geometry);

/// True when theta lies in the closed exploratory region for this spec.
bool sufficiently_exploratory(const AcquisitionSpec& spec, double theta, double delta_r1);

/// Uniform grid of the given size; odd sizes span [-pi, pi] and contain 0.
std::vector<double> theta_grid(int size);

/// 137 points from -34 to 34 in steps of 0.5.
std::vector<double> default_delta_r_grid();

/// Index of the grid point nearest to v (grid ascending, uniform or not).
std::size_t nearest_index(const std::vector<double>& grid, double v);

/// Acquisition surfaces for one task geometry, prior and starting reward,
/// with the per-spec global minimum used by the augmented functions cached.
class AcquisitionModel {
public:
    AcquisitionModel(TaskGeometry geometry = {}, SurrogatePrior prior = {}, double r0 = 93.0,
                     std::vector<double> delta_r_grid = default_delta_r_grid(), int theta_grid_size = 721);

    const TaskGeometry& geometry() const { return geometry_; }
    const SurrogatePrior& prior() const { return prior_; }
    double r0() const { return r0_; }
    const std::vector<double>& delta_r_grid() const { return delta_r_; }
    int theta_grid_size() const { return theta_size_; }

    SurrogatePosterior posterior(double delta_r1) const;

    double value(const AcquisitionSpec& spec, double theta, double delta_r1) const;
    double augmented_value(const AcquisitionSpec& spec, double theta, double delta_r1) const;

    struct Penalty {
        double value;
        double score;
    };
    /// Global minimum of the base acquisition over the (theta, delta_r) grid.
    Penalty penalty(const AcquisitionSpec& spec) const;

    ArgmaxSet argmax(const AcquisitionSpec& spec, double delta_r1) const;
    ArgmaxSet argmax(const AcquisitionSpec& spec, const SurrogatePosterior& post) const;
    AcquisitionCurve curve(const AcquisitionSpec& spec) const;

private:
    TaskGeometry geometry_;
    SurrogatePrior prior_;
    double r0_;
    std::vector<double> delta_r_;
    int theta_size_;
    std::vector<double> theta_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<int, double>, Penalty> penalty_cache_;
};

double augmented_value(const AcquisitionSpec& spec, double theta, double delta_r1, const SurrogatePosterior& post,
                       const TaskGeometry& geometry, double penalty_value);

ArgmaxSet argmax_over_theta(const AcquisitionSpec& spec, double delta_r1, const AcquisitionModel& model);

AcquisitionCurve build_curve(const AcquisitionSpec& spec, double r0, const TaskGeometry& geometry,
                             const std::vector<double>& delta_r_grid, int theta_grid_size = 721);

void write_curve_csv(std::ostream& out, const AcquisitionCurve& curve);

}  // namespace ibo
