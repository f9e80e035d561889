#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ibo/rng.hpp"

namespace ibo {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
    friend bool operator==(Point2 a, Point2 b) = default;

    double norm() const { return std::hypot(x, y); }
    double angle() const { return std::atan2(y, x); }
};

inline double distance(Point2 a, Point2 b) { return (a - b).norm(); }

/// Unit vector at angle theta.
inline Point2 unit(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double theta);

struct TaskGeometry {
    double task_radius = 459.0;
    double click_radius = 20.4;
    Point2 center{};

    void validate() const;
    friend bool operator==(const TaskGeometry&, const TaskGeometry&) = default;
};

inline constexpr double max_reward_scale = 5.0 / 3.0;
inline constexpr double hotspot_score = 100.0;

struct Round {
    int id = 0;
    Point2 hotspot{};
    double k = 0.0;
    double r0 = hotspot_score;
    int num_moves = 3;
    bool reachable = false;
    std::vector<Point2> moves;
    std::vector<double> rewards;

    bool over() const { return moves.size() >= static_cast<std::size_t>(num_moves) + 1; }
    double reward_at(Point2 m) const;
    double delta_r(std::size_t move_index) const { return rewards.at(move_index) - rewards.at(move_index - 1); }

    friend bool operator==(const Round&, const Round&) = default;
};

struct MoveOutcome {
    Point2 position{};
    double reward = 0.0;
    double delta_r = 0.0;
    bool round_over = false;
};

struct MoveResult {
    Round round;
    MoveOutcome outcome;
};

/// Round with a given hotspot and reward scale, starting at the task center.
Round make_round(const TaskGeometry& geometry, Point2 hotspot, double k, int num_moves, int id = 0);

Round new_round(const TaskGeometry& geometry, std::uint64_t seed, int id = 0);
Round new_round(const TaskGeometry& geometry, Rng& rng, int id = 0);

MoveResult submit_move(const Round& round, Point2 target, const TaskGeometry& geometry);

/// Signed angle in (-pi, pi] from displacement move_index-1 to displacement move_index.
double relative_angle(const Round& round, std::size_t move_index);

/// Round CSV: header then one row per move (move 0 included).
void write_round_csv_header(std::ostream& out);
void write_round_csv(std::ostream& out, const Round& round);
void write_rounds_csv(std::ostream& out, const std::vector<Round>& rounds);
std::vector<Round> read_rounds_csv(std::istream& in);

}  // namespace ibo
