#include "ibo/surrogate.hpp"

#include <cmath>

#include "ibo/error.hpp"

namespace ibo {

void SurrogatePrior::validate() const {
    if (!(sigma_s > 0.0) || !(sigma_beta > 0.0) || !std::isfinite(sigma_s) || !std::isfinite(sigma_beta) ||
        !mu0.allFinite())
        throw InvalidArgument("surrogate prior requires sigma_s > 0 and sigma_beta > 0");
}

namespace {

void check_covariance(const Eigen::Matrix2d& sigma) {
    if (!sigma.allFinite() || !(sigma(0, 0) > 0.0) || !(sigma(1, 1) > 0.0) ||
        !(sigma(0, 0) * sigma(1, 1) - sigma(0, 1) * sigma(0, 1) > 0.0))
        throw SingularUpdate("posterior covariance not positive definite");
}

}  // namespace

SurrogatePosterior condition_on_moves(const SurrogatePrior& prior, std::span<const Point2> moves,
                                      std::span<const double> rewards) {
    prior.validate();
    if (moves.size() != rewards.size() || moves.empty()) throw InvalidArgument("moves and rewards must match");
    const Eigen::Index n = static_cast<Eigen::Index>(moves.size());
    SurrogatePosterior post;
    post.r0 = rewards[0];
    post.sigma_s = prior.sigma_s;
    post.design.resize(n, 2);
    post.rewards.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point2 rel = moves[i] - moves[0];
        post.design(i, 0) = rel.x;
        post.design(i, 1) = rel.y;
        post.rewards(i) = rewards[i];
    }
    const Eigen::VectorXd centered = post.rewards.array() - post.r0;
    const double ps = 1.0 / (prior.sigma_s * prior.sigma_s);
    const double pb = 1.0 / (prior.sigma_beta * prior.sigma_beta);
    const Eigen::Matrix2d gram = post.design.transpose() * post.design;
    if (gram(0, 1) == 0.0) {
        post.sigma << 1.0 / (gram(0, 0) * ps + pb), 0.0, 0.0, 1.0 / (gram(1, 1) * ps + pb);
        const Eigen::Vector2d rhs = post.design.transpose() * centered * ps + prior.mu0 * pb;
        post.mu = post.sigma.diagonal().cwiseProduct(rhs);
    } else {
        // Least squares on the prior-augmented design; avoids forming the
        // badly conditioned precision matrix.
        Eigen::MatrixX2d a(n + 2, 2);
        Eigen::VectorXd b(n + 2);
        a.topRows(n) = post.design / prior.sigma_s;
        a.bottomRows(2) = Eigen::Matrix2d::Identity() / prior.sigma_beta;
        b.head(n) = centered / prior.sigma_s;
        b.tail(2) = prior.mu0 / prior.sigma_beta;
        const Eigen::HouseholderQR<Eigen::MatrixX2d> qr(a);
        const Eigen::Matrix2d r = qr.matrixQR().topRows(2).triangularView<Eigen::Upper>();
        const Eigen::Matrix2d r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::Matrix2d::Identity());
        post.sigma = r_inv * r_inv.transpose();
        post.sigma(1, 0) = post.sigma(0, 1);
        const Eigen::VectorXd qtb = qr.householderQ().transpose() * b;
        post.mu = r.triangularView<Eigen::Upper>().solve(qtb.head(2));
    }
    check_covariance(post.sigma);
    if (!post.mu.allFinite()) throw SingularUpdate("posterior mean not finite");
    return post;
}

SurrogatePosterior posterior_after_move1(const SurrogatePrior& prior, Point2 m1, double r0, double r1) {
    if (m1.x == 0.0 && m1.y == 0.0) throw DegenerateMove("move 1 has zero displacement");
    const Point2 moves[2] = {{0.0, 0.0}, m1};
    const double rewards[2] = {r0, r1};
    return condition_on_moves(prior, moves, rewards);
}

SurrogatePosterior canonical_posterior(const SurrogatePrior& prior, double r0, double delta_r1,
                                       const TaskGeometry& geometry) {
    return posterior_after_move1(prior, {geometry.click_radius, 0.0}, r0, r0 + delta_r1);
}

PredictiveGaussian predictive_at(const SurrogatePosterior& post, Point2 m) {
    const Eigen::Vector2d v(m.x, m.y);
    const double var = v.dot(post.sigma * v) + post.sigma_s * post.sigma_s;
    return {v.dot(post.mu) + post.r0, std::sqrt(var)};
}

PredictiveGaussian predictive_on_boundary(const SurrogatePosterior& post, double theta,
                                          const TaskGeometry& geometry) {
    const double c = geometry.click_radius;
    if (post.design.rows() >= 2 && (post.design(1, 1) != 0.0 || post.design(1, 0) < 0.0)) {
        const double alpha = std::atan2(post.design(1, 1), post.design(1, 0));
        return predictive_at(post, c * unit(alpha + theta));
    }
    const double cs = std::cos(theta), sn = std::sin(theta);
    // Expanded quadratic form so that mirrored angles give bit-identical values.
    const double var = c * c * (cs * cs * post.sigma(0, 0) + sn * sn * post.sigma(1, 1)) +
                       2.0 * c * c * cs * sn * post.sigma(0, 1) + post.sigma_s * post.sigma_s;
    const double mean = post.r0 + c * (cs * post.mu(0) + sn * post.mu(1));
    return {mean, std::sqrt(var)};
}

}  // namespace ibo
