#include "ibo/agents.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "csv.hpp"
#include "ibo/error.hpp"
#include "ibo/simulation.hpp"
#include "ibo/surrogate.hpp"

namespace ibo {

namespace {

double jitter(double gamma, Rng& rng) {
    if (gamma == 0.0) return 0.0;
    return gamma * std::tan(std::numbers::pi * (rng.uniform() - 0.5));
}

}  // namespace

std::vector<Round> simulate_agent(const AgentPolicy& policy, std::size_t n_rounds, const AcquisitionModel& model,
                                  std::uint64_t seed) {
    const TaskGeometry& geo = model.geometry();
    const double c = geo.click_radius;
    std::vector<Round> rounds;
    rounds.reserve(n_rounds);
    const Rng root(seed);
    for (std::size_t r = 0; r < n_rounds; ++r) {
        Rng task_rng = root.split(2 * r);
        Rng noise = root.split(2 * r + 1);
        Round round = new_round(geo, task_rng, static_cast<int>(r));
        double heading = task_rng.angle();
        round = submit_move(round, round.moves.back() + c * unit(heading), geo).round;

        double theta2;
        if (policy.move2_spec) {
            const ArgmaxSet modes = model.argmax(*policy.move2_spec, round.delta_r(1));
            theta2 = sample_theta(modes, policy.w, 0.0, noise);
        } else {
            theta2 = noise.bernoulli(0.5) ? policy.move2_angle : -policy.move2_angle;
        }
        heading += theta2 + jitter(policy.move2_noise, noise);
        round = submit_move(round, round.moves.back() + c * unit(heading), geo).round;

        while (!round.over()) {
            const auto post = condition_on_moves(model.prior(), round.moves, round.rewards);
            if (post.mu.norm() > 0.0) heading = std::atan2(post.mu(1), post.mu(0));
            heading += jitter(policy.heading_noise, noise);
            round = submit_move(round, round.moves.back() + c * unit(heading), geo).round;
        }
        rounds.push_back(std::move(round));
    }
    return rounds;
}

const char* performance_metric_name(int i) {
    static const char* names[n_performance_metrics] = {"mean_dr2", "mean_dr3", "mean_total_dr", "mean_zigzag"};
    return names[i];
}

double zigzag(const Round& round) {
    double s = 0.0;
    for (std::size_t i = 4; i < round.moves.size(); ++i) {
        try {
            s += std::abs(relative_angle(round, i));
        } catch (const DegenerateMove&) {
        }
    }
    return s;
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

PerformanceTable zigzag_and_performance(const std::vector<std::pair<std::string, std::vector<Round>>>& subjects) {
    PerformanceTable t;
    for (const auto& [name, rounds] : subjects) {
        PerformanceRow row;
        row.subject = name;
        for (const auto& r : rounds) {
            if (!r.over()) throw IncompleteRound();
            row.mean_dr2 += r.delta_r(2);
            row.mean_dr3 += r.delta_r(3);
            row.mean_total_dr += r.rewards.back() - r.rewards[1];
            row.mean_zigzag += zigzag(r);
        }
        row.n_rounds = rounds.size();
        if (!rounds.empty()) {
            const double n = static_cast<double>(rounds.size());
            row.mean_dr2 /= n;
            row.mean_dr3 /= n;
            row.mean_total_dr /= n;
            row.mean_zigzag /= n;
        }
        t.rows.push_back(row);
    }
    std::vector<double> cols[n_performance_metrics];
    for (const auto& r : t.rows) {
        cols[0].push_back(r.mean_dr2);
        cols[1].push_back(r.mean_dr3);
        cols[2].push_back(r.mean_total_dr);
        cols[3].push_back(r.mean_zigzag);
    }
    for (int i = 0; i < n_performance_metrics; ++i)
        for (int j = 0; j < n_performance_metrics; ++j) t.corr[i][j] = pearson(cols[i], cols[j]);
    return t;
}

void write_performance_csv(std::ostream& out, const PerformanceTable& table) {
    using detail::fmt17;
    out << "subject,n_rounds,mean_dr2,mean_dr3,mean_total_dr,mean_zigzag\n";
    for (const auto& r : table.rows)
        out << r.subject << ',' << r.n_rounds << ',' << fmt17(r.mean_dr2) << ',' << fmt17(r.mean_dr3) << ','
            << fmt17(r.mean_total_dr) << ',' << fmt17(r.mean_zigzag) << '\n';
}

void write_correlation_csv(std::ostream& out, const PerformanceTable& table) {
    out << "metric";
    for (int j = 0; j < n_performance_metrics; ++j) out << ',' << performance_metric_name(j);
    out << '\n';
    for (int i = 0; i < n_performance_metrics; ++i) {
        out << performance_metric_name(i);
        for (int j = 0; j < n_performance_metrics; ++j) {
            out << ',';
            if (table.corr[i][j]) out << detail::fmt17(*table.corr[i][j]);
        }
        out << '\n';
    }
}

}  // namespace ibo
