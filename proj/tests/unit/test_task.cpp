#include <doctest.h>

#include <numbers>
#include <sstream>

#include "ibo/error.hpp"
#include "ibo/task.hpp"

using namespace ibo;
using std::numbers::pi;

TEST_CASE("new_round draws a valid round") {
    const TaskGeometry g;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const Round r = new_round(g, seed);
        CHECK(r.num_moves >= 3);
        CHECK(r.num_moves <= 10);
        CHECK(r.k >= 0.0);
        CHECK(r.k <= 5.0 / 3.0);
        CHECK(distance(r.hotspot, g.center) <= g.task_radius);
        CHECK(r.moves.size() == 1);
        CHECK(r.rewards[0] == r.r0);
        CHECK(r.reward_at(r.hotspot) == doctest::Approx(100.0).epsilon(1e-12));
    }
    CHECK(new_round(g, 42) == new_round(g, 42));
}

TEST_CASE("reachable flag follows hotspot distance") {
    const TaskGeometry g;
    const Round near = make_round(g, {4.2, 0.0}, 1.0, 3);
    CHECK(near.reachable);
    const Round far = make_round(g, {300.0, 0.0}, 1.0, 10);
    CHECK_FALSE(far.reachable);
    const Round edge = make_round(g, {3 * 20.4, 0.0}, 1.0, 3);
    CHECK(edge.reachable);
}

TEST_CASE("reward follows distance change") {
    const TaskGeometry g;
    Round r = make_round(g, {100.0, 0.0}, 1.0, 3);
    const auto res = submit_move(r, {20.4, 0.0}, g);
    CHECK(res.outcome.delta_r == doctest::Approx(20.4).epsilon(1e-12));

    Round flat = make_round(g, {200.0, 50.0}, 0.0, 4);
    CHECK(flat.r0 == 100.0);
    flat = submit_move(flat, {-15.0, 3.0}, g).round;
    CHECK(flat.rewards.back() == 100.0);

    // Score of 98 after a straight move from 93.
    const double k = 5.0 / 20.4;
    const double d0 = (100.0 - 93.0) / k;
    Round ex = make_round(g, {d0, 0.0}, k, 5);
    CHECK(ex.r0 == doctest::Approx(93.0).epsilon(1e-12));
    const auto m1 = submit_move(ex, {20.4, 0.0}, g);
    CHECK(m1.outcome.reward == doctest::Approx(98.0).epsilon(1e-12));
    CHECK(m1.outcome.delta_r == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("moves beyond the click radius are snapped radially") {
    const TaskGeometry g;
    Round r = make_round(g, {300.0, 0.0}, 1.0, 4);
    const auto res = submit_move(r, {30.0 * std::cos(0.7), 30.0 * std::sin(0.7)}, g);
    CHECK(res.outcome.position.norm() == doctest::Approx(20.4).epsilon(1e-12));
    CHECK(res.outcome.position.angle() == doctest::Approx(0.7).epsilon(1e-12));

    const auto same = submit_move(res.round, res.outcome.position, g);
    CHECK(same.outcome.delta_r == 0.0);
    CHECK(same.round.moves.back() == res.outcome.position);
}

TEST_CASE("snap and reward invariants over random play") {
    const TaskGeometry g;
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        Round r = new_round(g, rng);
        while (!r.over()) {
            const Point2 target = r.moves.back() + rng.uniform(0.0, 60.0) * unit(rng.angle());
            r = submit_move(r, target, g).round;
        }
        CHECK(r.moves.size() == static_cast<std::size_t>(r.num_moves) + 1);
        for (std::size_t m = 1; m < r.moves.size(); ++m) {
            CHECK(distance(r.moves[m], r.moves[m - 1]) <= g.click_radius + 1e-9);
            const double expect = r.r0 + r.k * (distance(r.moves[0], r.hotspot) - distance(r.moves[m], r.hotspot));
            CHECK(r.rewards[m] == doctest::Approx(expect).epsilon(1e-12));
            CHECK(r.rewards[m] <= 100.0 + 1e-9);
        }
        CHECK(std::abs(r.delta_r(1)) <= 34.0 + 1e-9);
        CHECK_THROWS_AS(submit_move(r, {0.0, 0.0}, g), MoveAfterRoundOver);
    }
}

TEST_CASE("relative_angle") {
    const TaskGeometry g;
    Round r = make_round(g, {300.0, 0.0}, 1.0, 4);
    auto along = submit_move(r, {20.4, 0.0}, g).round;
    CHECK(relative_angle(submit_move(along, {40.8, 0.0}, g).round, 2) == 0.0);
    CHECK(relative_angle(submit_move(along, {20.4, 20.4}, g).round, 2) == doctest::Approx(pi / 2));
    CHECK(relative_angle(submit_move(along, {0.0, 0.0}, g).round, 2) == pi);

    auto tilted = submit_move(r, 20.4 * unit(1.0), g).round;
    tilted = submit_move(tilted, tilted.moves.back() + 20.4 * unit(-2.5), g).round;
    CHECK(relative_angle(tilted, 2) == doctest::Approx(-3.5 + 2 * pi).epsilon(1e-12));

    auto stall = submit_move(r, {0.0, 0.0}, g).round;
    stall = submit_move(stall, {10.0, 0.0}, g).round;
    CHECK_THROWS_AS(relative_angle(stall, 2), DegenerateMove);
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
    CHECK(wrap_angle(pi) == pi);
    CHECK(wrap_angle(-pi) == doctest::Approx(pi));
    CHECK(wrap_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
    CHECK(wrap_angle(-7.0) == doctest::Approx(-7.0 + 2 * pi));
}

TEST_CASE("round CSV round-trip") {
    const TaskGeometry g;
    std::vector<Round> rounds;
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        Round r = new_round(g, rng, i);
        while (!r.over()) r = submit_move(r, r.moves.back() + 25.0 * unit(rng.angle()), g).round;
        rounds.push_back(r);
    }
    std::stringstream ss;
    write_rounds_csv(ss, rounds);
    const auto back = read_rounds_csv(ss);
    REQUIRE(back.size() == rounds.size());
    for (std::size_t i = 0; i < rounds.size(); ++i) CHECK(back[i] == rounds[i]);

    Round three = make_round(g, {300.0, 0.0}, 1.0, 3);
    CHECK_THROWS_AS(write_round_csv(ss, three), IncompleteRound);
    while (!three.over()) three = submit_move(three, three.moves.back() + Point2{20.4, 0.0}, g).round;
    std::stringstream one;
    write_round_csv(one, three);
    int lines = 0;
    for (std::string l; std::getline(one, l);) ++lines;
    CHECK(lines == 4);
}

TEST_CASE("round CSV parse errors carry line numbers") {
    std::stringstream ss("round_id,move_index,x,y,reward,hotspot_x,hotspot_y,k,r0,num_moves,reachable\n"
                         "0,0,0,0,90,10,10,1,90,3,0\n"
                         "0,1,x,0,90,10,10,1,90,3,0\n");
    try {
        read_rounds_csv(ss);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("geometry validation") {
    TaskGeometry bad;
    bad.click_radius = 500.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    CHECK_THROWS_AS(make_round(TaskGeometry{}, {0, 0}, 2.0, 3), InvalidArgument);
}

TEST_CASE("rng is deterministic and splittable") {
    Rng a(1), b(1);
    for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
    CHECK(Rng(1).split(3).next() == Rng(1).split(3).next());
    CHECK(Rng(1).split(3).next() != Rng(1).split(4).next());
    Rng c(3);
    for (int i = 0; i < 1000; ++i) {
        const auto v = c.uniform_int(3, 10);
        CHECK(v >= 3);
        CHECK(v <= 10);
        const double u = c.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}
