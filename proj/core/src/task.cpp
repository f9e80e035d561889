#include "ibo/task.hpp"

#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "csv.hpp"
#include "ibo/error.hpp"

namespace ibo {

double wrap_angle(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (theta > -std::numbers::pi && theta <= std::numbers::pi) return theta;
    double r = std::remainder(theta, two_pi);
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

void TaskGeometry::validate() const {
    if (!(click_radius > 0.0) || !(task_radius > click_radius) || !std::isfinite(task_radius) ||
        !std::isfinite(center.x) || !std::isfinite(center.y))
        throw InvalidArgument("geometry requires task_radius > click_radius > 0");
}

double Round::reward_at(Point2 m) const {
    return r0 + k * (distance(moves.front(), hotspot) - distance(m, hotspot));
}

Round make_round(const TaskGeometry& geometry, Point2 hotspot, double k, int num_moves, int id) {
    geometry.validate();
    if (num_moves < 3 || num_moves > 10) throw InvalidArgument("num_moves must lie in [3, 10]");
    if (k < 0.0 || k > max_reward_scale) throw InvalidArgument("reward scale must lie in [0, 5/3]");
    const double d0 = distance(geometry.center, hotspot);
    if (d0 > geometry.task_radius) throw InvalidArgument("hotspot outside the task region");
    Round r;
    r.id = id;
    r.hotspot = hotspot;
    r.k = k;
    r.r0 = hotspot_score - k * d0;
    r.num_moves = num_moves;
    r.reachable = d0 <= num_moves * geometry.click_radius;
    r.moves = {geometry.center};
    r.rewards = {r.r0};
    return r;
}

Round new_round(const TaskGeometry& geometry, Rng& rng, int id) {
    geometry.validate();
    const double phi = rng.angle();
    const double rad = geometry.task_radius * std::sqrt(rng.uniform());
    const double k = rng.uniform(0.0, max_reward_scale);
    const int n = static_cast<int>(rng.uniform_int(3, 10));
    return make_round(geometry, geometry.center + rad * unit(phi), k, n, id);
}

Round new_round(const TaskGeometry& geometry, std::uint64_t seed, int id) {
    Rng rng(seed);
    return new_round(geometry, rng, id);
}

MoveResult submit_move(const Round& round, Point2 target, const TaskGeometry& geometry) {
    if (round.over()) throw MoveAfterRoundOver();
    if (!std::isfinite(target.x) || !std::isfinite(target.y)) throw InvalidArgument("non-finite move target");
    const Point2 last = round.moves.back();
    const Point2 d = target - last;
    const double len = d.norm();
    Point2 pos = target;
    if (len > geometry.click_radius) pos = last + (geometry.click_radius / len) * d;

    MoveResult res{round, {}};
    res.round.moves.push_back(pos);
    res.round.rewards.push_back(round.reward_at(pos));
    res.outcome.position = pos;
    res.outcome.reward = res.round.rewards.back();
    res.outcome.delta_r = res.outcome.reward - round.rewards.back();
    res.outcome.round_over = res.round.over();
    return res;
}

double relative_angle(const Round& round, std::size_t move_index) {
    if (move_index < 2 || move_index >= round.moves.size())
        throw InvalidArgument("relative_angle needs an existing move with index >= 2");
    const Point2 a = round.moves[move_index - 1] - round.moves[move_index - 2];
    const Point2 b = round.moves[move_index] - round.moves[move_index - 1];
    if (a.norm() == 0.0 || b.norm() == 0.0) throw DegenerateMove("zero displacement in relative_angle");
    double t = std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y);
    if (t <= -std::numbers::pi) t = std::numbers::pi;
    return t;
}

void write_round_csv_header(std::ostream& out) {
    out << "round_id,move_index,x,y,reward,hotspot_x,hotspot_y,k,r0,num_moves,reachable\n";
}

void write_round_csv(std::ostream& out, const Round& round) {
    using detail::fmt17;
    if (!round.over()) throw IncompleteRound();
    for (std::size_t i = 0; i < round.moves.size(); ++i) {
        out << round.id << ',' << i << ',' << fmt17(round.moves[i].x) << ',' << fmt17(round.moves[i].y) << ','
            << fmt17(round.rewards[i]) << ',' << fmt17(round.hotspot.x) << ',' << fmt17(round.hotspot.y) << ','
            << fmt17(round.k) << ',' << fmt17(round.r0) << ',' << round.num_moves << ','
            << (round.reachable ? 1 : 0) << '\n';
    }
}

void write_rounds_csv(std::ostream& out, const std::vector<Round>& rounds) {
    write_round_csv_header(out);
    for (const auto& r : rounds) write_round_csv(out, r);
}

std::vector<Round> read_rounds_csv(std::istream& in) {
    using namespace detail;
    std::vector<Round> rounds;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) return rounds;
    ++lineno;
    if (trim(line) != "round_id,move_index,x,y,reward,hotspot_x,hotspot_y,k,r0,num_moves,reachable")
        throw ParseError(lineno, "unexpected round CSV header");
    Round* cur = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 11) throw ParseError(lineno, "expected 11 fields");
        const int id = static_cast<int>(parse_int(f[0], lineno));
        const auto idx = parse_int(f[1], lineno);
        const Point2 m{parse_double(f[2], lineno), parse_double(f[3], lineno)};
        const double reward = parse_double(f[4], lineno);
        if (idx == 0) {
            if (cur && !cur->over()) throw ParseError(lineno, "previous round is incomplete");
            Round r;
            r.id = id;
            r.hotspot = {parse_double(f[5], lineno), parse_double(f[6], lineno)};
            r.k = parse_double(f[7], lineno);
            r.r0 = parse_double(f[8], lineno);
            r.num_moves = static_cast<int>(parse_int(f[9], lineno));
            r.reachable = parse_int(f[10], lineno) != 0;
            if (r.num_moves < 3 || r.num_moves > 10) throw ParseError(lineno, "num_moves out of range");
            rounds.push_back(std::move(r));
            cur = &rounds.back();
        } else if (!cur || cur->id != id || static_cast<std::size_t>(idx) != cur->moves.size() || cur->over()) {
            throw ParseError(lineno, "move rows out of order");
        }
        cur->moves.push_back(m);
        cur->rewards.push_back(reward);
    }
    if (cur && !cur->over()) throw ParseError(lineno, "last round is incomplete");
    return rounds;
}

}  // namespace ibo
