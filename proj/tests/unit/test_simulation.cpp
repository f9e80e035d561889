#include <doctest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ibo/agents.hpp"
#include "ibo/error.hpp"
#include "ibo/grid.hpp"
#include "ibo/simulation.hpp"

using namespace ibo;
using std::numbers::pi;

namespace {

const AcquisitionModel& model() {
    static const AcquisitionModel m;
    return m;
}

const CandidateGrid& grid_u() {
    static const CandidateGrid g = precompute_grid(GridConfig{});
    return g;
}

// Wrapped Cauchy mass on (-pi, theta].
double wc_cdf(double theta, double mu, double gamma) {
    const double rho = std::exp(-gamma);
    const double k = (1 + rho) / (1 - rho);
    const auto g = [&](double d) { return 0.5 + std::atan(k * std::tan(d / 2)) / pi; };
    double x = g(wrap_angle(theta - mu)) - g(wrap_angle(-pi - mu));
    if (x < 0) x += 1.0;
    return x;
}

double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

}  // namespace

TEST_CASE("sampler matches the mixture density (KS at the 1% level)") {
    const std::size_t n = 10000;
    const double crit = 1.628 / std::sqrt(static_cast<double>(n));
    for (const auto& [modes, w, gamma] :
         std::vector<std::tuple<ArgmaxSet, double, double>>{{ArgmaxSet{{-1.1, 1.1}, 0}, 0.5, 0.25},
                                                            {ArgmaxSet{{-2.8, 2.8}, 0}, 0.2, 0.6},
                                                            {ArgmaxSet{{0.0}, 0}, 0.5, 0.05},
                                                            {ArgmaxSet{{pi}, 0}, 0.5, 0.25}}) {
        Rng rng(42);
        std::vector<double> xs(n);
        for (auto& x : xs) x = sample_theta(modes, w, gamma, rng);
        const auto cdf = [&](double t) {
            if (!modes.bimodal()) return wc_cdf(t, modes.angles[0], gamma);
            return w * wc_cdf(t, modes.angles[0], gamma) + (1 - w) * wc_cdf(t, modes.angles[1], gamma);
        };
        CHECK(ks_statistic(xs, cdf) < crit);
        for (double x : xs) {
            CHECK(x > -pi);
            CHECK(x <= pi);
        }
    }
}

TEST_CASE("generated observations") {
    SimConfig cfg;
    cfg.truth = {Family::ucb, 0.5};
    cfg.gamma = 0.01;
    cfg.n_obs = 500;
    const auto obs = generate_observations(cfg, model());
    CHECK(obs.size() == 500);
    int near = 0, pos = 0;
    for (const auto& o : obs.pairs) {
        CHECK(std::abs(o.delta_r1) <= 34.0);
        if (o.delta_r1 > 0) {
            ++pos;
            near += std::abs(o.theta2) < 0.1;
        }
    }
    CHECK(near >= 0.9 * pos);
    CHECK(generate_observations(cfg, model()) == obs);

    cfg.n_obs = 0;
    CHECK(generate_observations(cfg, model()).empty());

    cfg.truth = {Family::ucb, 0.95};
    cfg.gamma = 0.25;
    cfg.n_obs = 10000;
    cfg.seed = 9;
    const auto big = generate_observations(cfg, model());
    double sign_sum = 0.0;
    int bimodal = 0;
    for (const auto& o : big.pairs) {
        if (!model().argmax(cfg.truth, o.delta_r1).bimodal()) continue;
        ++bimodal;
        sign_sum += o.theta2 > 0 ? 1.0 : -1.0;
    }
    REQUIRE(bimodal > 1000);
    CHECK(std::abs(sign_sum / bimodal) < 4.0 / std::sqrt(static_cast<double>(bimodal)));
}

TEST_CASE("coverage study at n = 1000") {
    std::vector<SimConfig> cfgs;
    for (const AcquisitionSpec& s :
         {AcquisitionSpec{Family::pi, 1.0}, AcquisitionSpec{Family::pi, 15.0}, AcquisitionSpec{Family::pi, 30.0},
          AcquisitionSpec{Family::ei, 0.0}, AcquisitionSpec{Family::ei, 15.0}, AcquisitionSpec{Family::ei, 30.0},
          AcquisitionSpec{Family::ucb, 0.5}, AcquisitionSpec{Family::ucb, 0.75}, AcquisitionSpec{Family::ucb, 0.99}}) {
        SimConfig c;
        c.truth = s;
        c.n_obs = 1000;
        c.n_reps = 4;
        c.seed = 77;
        cfgs.push_back(c);
    }
    const auto report = coverage_study(cfgs, grid_u());
    REQUIRE(report.rows.size() == 9);
    int covered = 0, total = 0;
    for (const auto& r : report.rows) {
        CHECK(r.coverage >= 0.0);
        CHECK(r.coverage <= 1.0);
        CHECK(r.ci_low <= r.coverage);
        CHECK(r.ci_high >= r.coverage);
        covered += r.covered;
        total += r.n_reps;
    }
    CHECK(static_cast<double>(covered) / total >= 0.80);

    std::stringstream ss;
    write_coverage_csv(ss, report);
    std::string header;
    std::getline(ss, header);
    CHECK(header == "family,param,n_obs,coverage,n_reps,ci_low,ci_high");
}

TEST_CASE("coverage is reproducible and CIs are exact") {
    SimConfig c;
    c.truth = {Family::ei, 10.0};
    c.n_obs = 50;
    c.n_reps = 6;
    c.seed = 3;
    const auto a = coverage_study({c}, grid_u());
    const auto b = coverage_study({c}, grid_u());
    CHECK(a.rows[0].covered == b.rows[0].covered);
    // Clopper-Pearson bounds for 0 of 6 and 6 of 6.
    c.n_reps = 0;
    CHECK(coverage_study({c}, grid_u()).rows[0].ci_high == 1.0);
}

TEST_CASE("omitted-truth study") {
    SimConfig c;
    c.truth = {Family::pi, 1.0};
    c.n_obs = 10;
    c.n_reps = 20;
    c.seed = 5;
    c.inference_families = {Family::ei, Family::ucb};
    const auto report = omitted_truth_study({c}, grid_u());
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].family == "pi>ei");
    CHECK(report.rows[1].family == "pi>ucb");
    CHECK(report.rows[1].coverage >= 0.9);
    const auto again = omitted_truth_study({c}, grid_u());
    CHECK(again.rows[0].covered == report.rows[0].covered);
    // Credible sets shrink with more data.
    c.n_obs = 100;
    const auto more = omitted_truth_study({c}, grid_u());
    CHECK(more.rows[0].coverage <= report.rows[0].coverage);

    c.inference_families = {Family::pi, Family::ei};
    CHECK_THROWS_AS(omitted_truth_study({c}, grid_u()), InvalidArgument);
}

TEST_CASE("move-3 direction") {
    const TaskGeometry g;
    SUBCASE("planar reward is recovered by the posterior mean") {
        Rng rng(1);
        const double step = 2 * pi / 720;
        for (int i = 0; i < 50; ++i) {
            const double grad_dir = rng.angle(), k = rng.uniform(0.05, 5.0 / 3.0);
            const double phi1 = rng.angle(), turn = rng.uniform(0.3, 2.8) * (rng.bernoulli(0.5) ? 1 : -1);
            Move3Case c{};
            c.moves[0] = {0.0, 0.0};
            c.moves[1] = 20.4 * unit(phi1);
            c.moves[2] = c.moves[1] + 20.4 * unit(phi1 + turn);
            for (int m = 0; m < 3; ++m) {
                const Point2 u = unit(grad_dir);
                c.rewards[m] = 80.0 + k * (c.moves[m].x * u.x + c.moves[m].y * u.y);
            }
            const double got = move3_direction({Family::ucb, 0.5}, c, {}, g);
            CHECK(std::abs(wrap_angle(got - grad_dir)) <= 2 * step);
        }
    }
    SUBCASE("specs without an off-axis move 2 are rejected") {
        CHECK_THROWS_AS(move3_gradient_check({Family::pi, 0.0}, g, 5, 1), InvalidArgument);
    }
    SUBCASE("cone reward far from the hotspot") {
        const auto sum = move3_gradient_check({Family::ucb, 0.95}, g, 50, 2);
        CHECK(sum.mean_error <= 0.1);
    }
    SUBCASE("near the hotspot errors grow") {
        Move3Options opts;
        opts.min_distance_clicks = 0.5;
        opts.max_distance_clicks = 1.5;
        const auto near = move3_gradient_check({Family::ucb, 0.95}, g, 50, 2, opts);
        MESSAGE("move-3 mean error within 1.5 click radii: ", near.mean_error, " rad (max ", near.max_error, ")");
    }
    SUBCASE("collinear moves are rejected") {
        Move3Case c{{300, 0}, {{0, 0}, {20.4, 0}, {40.8, 0}}, {90, 91, 92}};
        CHECK_THROWS_AS(move3_direction({Family::ucb, 0.9}, c, {}, g), CollinearMoves);
    }
}

TEST_CASE("unreachable hotspots dominate") {
    const TaskGeometry g;
    Rng rng(1);
    int unreachable = 0;
    for (int i = 0; i < 10000; ++i) unreachable += !new_round(g, rng).reachable;
    CHECK(unreachable / 10000.0 >= 0.85);
    CHECK(unreachable / 10000.0 <= 0.95);
}

TEST_CASE("zigzag and performance metrics") {
    const TaskGeometry g;
    Round straight = make_round(g, {400.0, 0.0}, 1.0, 10);
    while (!straight.over()) straight = submit_move(straight, straight.moves.back() + Point2{20.4, 0.0}, g).round;
    CHECK(zigzag(straight) == 0.0);

    CHECK_FALSE(pearson({1, 1, 1}, {1, 2, 3}).has_value());
    CHECK(*pearson({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
    CHECK(*pearson({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0));

    AgentPolicy exploit;
    exploit.name = "exploit";
    exploit.move2_spec = AcquisitionSpec{Family::pi, 0.0};
    AgentPolicy explore;
    explore.name = "explore";
    explore.move2_angle = pi / 2;
    const auto a = simulate_agent(exploit, 400, model(), 4);
    const auto b = simulate_agent(explore, 400, model(), 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].hotspot == b[i].hotspot);
        CHECK(a[i].moves[1] == b[i].moves[1]);
    }
    const auto table = zigzag_and_performance({{"exploit", a}, {"explore", b}});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].mean_dr2 > table.rows[1].mean_dr2);
    CHECK(simulate_agent(exploit, 20, model(), 4) == simulate_agent(exploit, 20, model(), 4));
}

TEST_CASE("move-1 angles relative to the hotspot are uniform") {
    AgentPolicy agent;
    agent.move2_spec = AcquisitionSpec{Family::ucb, 0.9};
    const auto rounds = simulate_agent(agent, 6000, model(), 12);
    std::vector<int> bins(12, 0);
    for (const auto& r : rounds) {
        const double a = wrap_angle((r.moves[1] - r.moves[0]).angle() - (r.hotspot - r.moves[0]).angle());
        const int b = std::min(11, static_cast<int>((a + pi) / (2 * pi) * 12));
        ++bins[b];
    }
    const double e = rounds.size() / 12.0;
    double chi2 = 0.0;
    for (int c : bins) chi2 += (c - e) * (c - e) / e;
    CHECK(chi2 < boost::math::quantile(boost::math::chi_squared(11), 0.99));
}
