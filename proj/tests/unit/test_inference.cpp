#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "ibo/error.hpp"
#include "ibo/grid.hpp"
#include "ibo/inference.hpp"
#include "ibo/likelihood.hpp"
#include "ibo/report.hpp"
#include "ibo/simulation.hpp"

using namespace ibo;
using std::numbers::pi;

namespace {

std::shared_ptr<const CandidateGrid> grid_u() {
    static const auto g = std::make_shared<const CandidateGrid>(precompute_grid(GridConfig{}));
    return g;
}

std::shared_ptr<const CandidateGrid> grid_split_coarse() {
    static const auto g = [] {
        GridConfig c;
        c.augmentation = Augmentation::split;
        c.coarse_tau = true;
        return std::make_shared<const CandidateGrid>(precompute_grid(c));
    }();
    return g;
}

const AcquisitionModel& model() {
    static const AcquisitionModel m;
    return m;
}

ObservationSet simulate(const AcquisitionSpec& truth, int n, std::uint64_t seed, double w = 0.5, double gamma = 0.25) {
    SimConfig cfg;
    cfg.truth = truth;
    cfg.n_obs = n;
    cfg.w = w;
    cfg.gamma = gamma;
    cfg.seed = seed;
    return generate_observations(cfg, model());
}

double total_mass(const FitResult& fit) {
    double s = 0.0;
    for (std::size_t i = 0; i < fit.loglik.size(); ++i) s += std::exp(fit.log_posterior(i));
    return s;
}

}  // namespace

TEST_CASE("grid sizes") {
    const GridConfig cfg;
    CHECK(base_candidates(cfg).size() == 183);
    const auto& g = *grid_u();
    CHECK(g.num_curves() == 183);
    CHECK(g.num_gamma() == 61);
    CHECK(g.num_cells() == 183 * 61);
    CHECK(g.gamma().front() == 0.01);
    CHECK(g.gamma().back() == pi / 4);
    const auto& s = *grid_split_coarse();
    CHECK(s.tau_values().size() == 31);
    CHECK(s.num_curves() == 183 * 31 * 31);
    const auto sym = s.with_augmentation(Augmentation::symmetric);
    CHECK(sym.num_curves() == 183 * 31);
    CHECK(s.restrict_families({Family::ei}).num_curves() == 61 * 31 * 31);
    CHECK(linspace(0.0, 30.0, 61)[2] == 1.0);
}

TEST_CASE("grid curves match direct argmax") {
    const auto& s = *grid_split_coarse();
    Rng rng(6);
    for (int i = 0; i < 40; ++i) {
        const std::size_t c = rng.uniform_int(0, s.num_candidates() - 1);
        const std::size_t combo = rng.uniform_int(0, s.num_tau_combos() - 1);
        const std::size_t bin = rng.uniform_int(0, 136);
        const auto spec = s.spec(c, combo);
        const auto direct = model().argmax(spec, s.tables().delta_r[bin]);
        INFO(describe(spec), " bin ", bin);
        CHECK(s.argmax(c, combo, bin).angles == direct.angles);
    }
}

TEST_CASE("PI xi = 0 and UCB p = 0.5 cells tie") {
    const auto& g = *grid_u();
    const auto obs = simulate({Family::ei, 10.0}, 200, 3);
    FitOptions exact;
    exact.screen_margin = INFINITY;
    const auto fit = posterior(obs, grid_u(), exact);
    const std::size_t pi0 = g.nearest_candidate({Family::pi, 0.0});
    const std::size_t ucb = g.nearest_candidate({Family::ucb, 0.5});
    for (std::size_t k = 0; k < g.num_gamma(); ++k)
        CHECK(fit.loglik[g.cell_index(pi0, 0, k)] == doctest::Approx(fit.loglik[g.cell_index(ucb, 0, k)]).epsilon(1e-9));
}

TEST_CASE("MAP ties are all listed") {
    const auto& g = *grid_u();
    const auto obs = simulate({Family::ucb, 0.5}, 300, 8);
    const auto fit = posterior(obs, grid_u());
    REQUIRE(fit.map_cells.size() >= 2);
    CHECK(g.spec(g.cell(fit.map_cells[0]).candidate, 0).family == Family::pi);
    for (std::size_t c : fit.map_cells) CHECK(fit.loglik[c] == fit.loglik[fit.map_cell()]);
}

TEST_CASE("single-cell grid carries all mass") {
    const auto one = std::make_shared<const CandidateGrid>(make_grid({{Family::ucb, 0.9}}, {0.3}, {0.0}, Augmentation::none));
    const auto fit = posterior(simulate({Family::ucb, 0.9}, 50, 1), one);
    CHECK(fit.loglik.size() == 1);
    CHECK(fit.log_posterior(0) == doctest::Approx(0.0));
    CHECK(fit.hpd_size == 1);
}

TEST_CASE("posterior normalises and cell likelihoods are exact") {
    const auto obs = simulate({Family::pi, 5.0}, 150, 4, 0.3, 0.15);
    FitOptions exact;
    exact.screen_margin = INFINITY;
    const auto fit = posterior(obs, grid_u(), exact);
    CHECK(total_mass(fit) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.n_screened == 0);
    const auto& g = *grid_u();
    Rng rng(1);
    for (int i = 0; i < 30; ++i) {
        const std::size_t cell = rng.uniform_int(0, g.num_cells() - 1);
        const auto cc = g.cell(cell);
        const auto curve = g.curve(cc.candidate, cc.combo);
        const double gamma = g.gamma()[cc.gamma];
        const auto em = fit_weight_em(obs, curve, gamma);
        CHECK(fit.w_hat(cell) == doctest::Approx(em.w).epsilon(1e-6));
        CHECK(fit.loglik[cell] == doctest::Approx(mixture_loglik(obs, curve, gamma, fit.w_hat(cell))).epsilon(1e-9));
    }
}

TEST_CASE("screening keeps the exact answer") {
    for (std::uint64_t seed : {1, 2}) {
        const auto obs = simulate({Family::ei, 20.0}, 200, seed);
        FitOptions exact;
        exact.screen_margin = INFINITY;
        const auto a = posterior(obs, grid_u(), exact);
        const auto b = posterior(obs, grid_u());
        CHECK(b.n_screened > 0);
        CHECK(a.map_cells == b.map_cells);
        CHECK(a.log_evidence == doctest::Approx(b.log_evidence).epsilon(1e-9));
        CHECK(a.hpd_size == b.hpd_size);
        CHECK(a.hpd_curves == b.hpd_curves);
        CHECK(total_mass(b) == doctest::Approx(1.0));
    }
}

TEST_CASE("HPD set is minimal") {
    for (std::uint64_t seed : {11, 12, 13}) {
        const auto fit = posterior(simulate({Family::ucb, 0.8}, 60, seed), grid_u());
        double mass = 0.0;
        for (std::size_t i = 0; i < fit.hpd_size; ++i) mass += fit.ranked[i].prob;
        CHECK(mass >= 0.95);
        CHECK(mass == doctest::Approx(fit.hpd_mass).epsilon(1e-12));
        // Ties at the cut enter together, so dropping the whole boundary
        // group must fall below the target.
        const double smallest = fit.ranked[fit.hpd_size - 1].prob;
        double group = 0.0;
        for (std::size_t i = 0; i < fit.hpd_size; ++i)
            if (fit.ranked[i].prob == smallest) group += smallest;
        CHECK(mass - group < 0.95);
        for (std::size_t i = 1; i < fit.ranked.size(); ++i) CHECK(fit.ranked[i].prob <= fit.ranked[i - 1].prob);
        for (std::size_t i = 0; i < fit.hpd_size; ++i) CHECK(fit.hpd_contains(fit.ranked[i].cell));
    }
}

TEST_CASE("doubling the data never raises entropy") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto obs = simulate({static_cast<Family>(seed % 3), seed % 3 == 2 ? 0.9 : 4.0}, 40, 100 + seed);
        ObservationSet twice = obs;
        twice.pairs.insert(twice.pairs.end(), obs.pairs.begin(), obs.pairs.end());
        const double h1 = posterior(obs, grid_u()).entropy();
        const double h2 = posterior(twice, grid_u()).entropy();
        CHECK(h2 <= h1 + 1e-9);
    }
}

TEST_CASE("reflected data give the same posterior") {
    const auto obs = simulate({Family::ei, 15.0}, 200, 21, 0.7);
    FitOptions exact;
    exact.screen_margin = INFINITY;
    const auto a = posterior(obs, grid_u(), exact);
    const auto b = posterior(obs.reflected(), grid_u(), exact);
    for (std::size_t i = 0; i < a.loglik.size(); ++i) CHECK(a.loglik[i] == doctest::Approx(b.loglik[i]).epsilon(1e-9));
    CHECK(a.map_w == doctest::Approx(1.0 - b.map_w).epsilon(1e-6));
}

TEST_CASE("fits are bit-identical across runs") {
    const auto obs = simulate({Family::ucb, 0.7}, 120, 5);
    const auto a = posterior(obs, grid_u());
    const auto b = posterior(obs, grid_u());
    CHECK(a.loglik == b.loglik);
    CHECK(fit_to_json(a) == fit_to_json(b));
    const auto s1 = posterior(obs, grid_split_coarse());
    const auto s2 = posterior(obs, grid_split_coarse());
    CHECK(fit_to_json(s1) == fit_to_json(s2));
}

TEST_CASE("global weight mode") {
    const auto obs = simulate({Family::ei, 15.0}, 300, 9, 0.2);
    FitOptions opts;
    opts.weight_mode = WeightMode::global;
    const auto fit = posterior(obs, grid_u(), opts);
    CHECK(fit.weight_mode == WeightMode::global);
    CHECK(std::abs(fit.global_w - 0.2) < 0.1);
    Rng rng(3);
    for (int i = 0; i < 20; ++i) CHECK(fit.w_hat(rng.uniform_int(0, fit.loglik.size() - 1)) == fit.global_w);
    CHECK(total_mass(fit) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("prediction region") {
    SUBCASE("unimodal at 0 with small gamma") {
        const auto one = std::make_shared<const CandidateGrid>(make_grid({{Family::ucb, 0.5}}, {0.05}, {0.0}, Augmentation::none));
        ObservationSet obs;
        for (int i = 0; i < 20; ++i) obs.pairs.push_back({10.0, 0.01 * (i - 10)});
        const auto fit = posterior(obs, one);
        const auto region = fit.prediction_region(10.0);
        REQUIRE(region.size() == 1);
        CHECK(region[0].lo < 0.0);
        CHECK(region[0].hi > 0.0);
        CHECK(region[0].hi - region[0].lo < 1.5);
    }
    SUBCASE("bimodal with w = 0.5 gives mirror intervals") {
        const auto one = std::make_shared<const CandidateGrid>(make_grid({{Family::ucb, 0.95}}, {0.1}, {0.0}, Augmentation::none));
        const auto modes = one->argmax(0, 0, one->nearest_bin(5.0));
        REQUIRE(modes.bimodal());
        ObservationSet obs;
        for (int i = 0; i < 40; ++i) obs.pairs.push_back({5.0, (i % 2 ? 1 : -1) * modes.magnitude()});
        const auto fit = posterior(obs, one);
        CHECK(fit.map_w == doctest::Approx(0.5).epsilon(1e-6));
        const auto region = fit.prediction_region(5.0);
        REQUIRE(region.size() == 2);
        CHECK(region[0].lo == doctest::Approx(-region[1].hi).epsilon(1e-9));
        CHECK(region[0].hi == doctest::Approx(-region[1].lo).epsilon(1e-9));
    }
    SUBCASE("region mass by quadrature") {
        const auto fit = posterior(simulate({Family::ei, 10.0}, 80, 14), grid_u());
        const auto& g = *grid_u();
        for (double dr : {-20.0, -3.0, 0.0, 4.0, 25.0}) {
            const std::size_t bin = g.nearest_bin(dr);
            const auto density = [&](double t) {
                double s = 0.0;
                for (const auto& rc : fit.ranked) {
                    const auto cc = g.cell(rc.cell);
                    const MixtureModel mix{g.argmax(cc.candidate, cc.combo, bin), g.gamma()[cc.gamma], rc.w};
                    s += rc.prob * mix.pdf(t);
                }
                return s;
            };
            double mass = 0.0;
            for (const auto& iv : fit.prediction_region(dr))
                mass += boost::math::quadrature::gauss<double, 30>::integrate(density, iv.lo, iv.hi);
            INFO("dr=", dr);
            CHECK(mass >= 0.95);
            CHECK(mass <= 0.96);
        }
    }
}

TEST_CASE("out-of-sample validation") {
    const auto obs = simulate({Family::ucb, 0.9}, 1000, 31);
    const auto oos = validate_out_of_sample(obs, grid_u(), 0.8, 7);
    CHECK(oos.n_train == 800);
    CHECK(oos.n_test == 200);
    REQUIRE(oos.test_ll.has_value());
    const double train = oos.train_ll / 800.0, test = *oos.test_ll / 200.0;
    CHECK(std::abs(test - train) <= 0.1 * std::abs(train));

    const auto all = validate_out_of_sample(obs, grid_u(), 1.0, 7);
    CHECK_FALSE(all.test_ll.has_value());
    CHECK(all.n_test == 0);

    ObservationSet few;
    few.pairs = {{1, 0}, {2, 0}, {3, 0}, {4, 0}};
    CHECK_THROWS_AS(validate_out_of_sample(few, grid_u(), 0.8, 1), TooFewObservations);
    CHECK_THROWS_AS(posterior(ObservationSet{}, grid_u()), EmptyObservations);
}

TEST_CASE("augmented model wins on augmented data") {
    const AcquisitionSpec truth{Family::ucb, 0.5, 0.9, 0.9, Augmentation::split};
    const auto split = grid_split_coarse();
    const auto u = std::make_shared<const CandidateGrid>(split->with_augmentation(Augmentation::none));
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto obs = simulate(truth, 400, 40 + seed);
        const auto a = validate_out_of_sample(obs, u, 0.8, seed);
        const auto b = validate_out_of_sample(obs, split, 0.8, seed);
        CHECK(*b.test_ll > *a.test_ll);
    }
}

TEST_CASE("model comparison table") {
    const auto split = grid_split_coarse();
    const auto u = std::make_shared<const CandidateGrid>(split->with_augmentation(Augmentation::none));
    const auto sym = std::make_shared<const CandidateGrid>(split->with_augmentation(Augmentation::symmetric));
    CHECK(model_compare({}, u, sym, split, 1).rows.empty());
    std::vector<ObservationSet> subjects{simulate({Family::ucb, 0.5, 1.2, 0.6, Augmentation::split}, 300, 1),
                                         simulate({Family::ucb, 0.8}, 300, 2)};
    subjects[0].subject_id = "a";
    subjects[1].subject_id = "b";
    const auto table = model_compare(subjects, u, sym, split, 3);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].best == 2);
    CHECK(table.total[0] == doctest::Approx(table.rows[0].test_ll[0] + table.rows[1].test_ll[0]));
    // No augmentation in the truth: all three within noise.
    const auto& r = table.rows[1];
    CHECK(std::abs(r.test_ll[2] - r.test_ll[0]) < 10.0);
}

TEST_CASE("UCB p = 0.99 truth is covered at n = 1000") {
    const auto& g = *grid_u();
    const std::size_t truth_curve = g.nearest_candidate({Family::ucb, 0.99});
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed)
        covered += posterior(simulate({Family::ucb, 0.99}, 1000, 500 + seed), grid_u()).hpd_contains_curve(truth_curve);
    CHECK(covered >= 4);
}

TEST_CASE("fit JSON layout") {
    const auto fit = posterior(simulate({Family::pi, 2.0}, 50, 2), grid_u());
    const std::string j = fit_to_json(fit);
    std::vector<std::size_t> pos;
    for (const char* key : {"\"subject_id\"", "\"map\"", "\"log_evidence\"", "\"hpd_cells\"", "\"envelope\"",
                            "\"prediction_region\"", "\"train_ll\"", "\"test_ll\""}) {
        const auto p = j.find(key);
        REQUIRE(p != std::string::npos);
        pos.push_back(p);
    }
    CHECK(std::is_sorted(pos.begin(), pos.end()));
}
