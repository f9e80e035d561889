#pragma once

#include <Eigen/Dense>
#include <span>

#include "ibo/task.hpp"

namespace ibo {

struct SurrogatePrior {
    Eigen::Vector2d mu0 = Eigen::Vector2d::Zero();
    double sigma_s = 0.01;
    double sigma_beta = 10.0;

    Eigen::Matrix2d sigma0() const { return sigma_beta * sigma_beta * Eigen::Matrix2d::Identity(); }
    void validate() const;
};

struct SurrogatePosterior {
    Eigen::Vector2d mu = Eigen::Vector2d::Zero();
    Eigen::Matrix2d sigma = Eigen::Matrix2d::Identity();
    double r0 = 0.0;
    double sigma_s = 0.01;
    /// Design rows (moves relative to move 0; the first row is zero) and rewards.
    Eigen::MatrixX2d design;
    Eigen::VectorXd rewards;

    /// Best reward observed so far.
    double incumbent() const { return rewards.maxCoeff(); }
};

struct PredictiveGaussian {
    double mean = 0.0;
    double sd = 1.0;
};

SurrogatePosterior posterior_after_move1(const SurrogatePrior& prior, Point2 m1, double r0, double r1);

/// Conditions on moves[0..n) (absolute positions) with rewards[0..n); move 0
/// is the origin of the design.
SurrogatePosterior condition_on_moves(const SurrogatePrior& prior, std::span<const Point2> moves,
                                      std::span<const double> rewards);

PredictiveGaussian predictive_at(const SurrogatePosterior& post, Point2 m);

/// Predictive at click_radius * (cos theta, sin theta) relative to move 0, in
/// the frame where move 1 lies along +x.
PredictiveGaussian predictive_on_boundary(const SurrogatePosterior& post, double theta, const TaskGeometry& geometry);

/// Posterior after a move of length click_radius along +x with the given
/// reward change. This is the frame every move-2 computation runs in.
SurrogatePosterior canonical_posterior(const SurrogatePrior& prior, double r0, double delta_r1,
                                       const TaskGeometry& geometry);

}  // namespace ibo
