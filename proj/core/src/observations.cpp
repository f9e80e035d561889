#include "ibo/observations.hpp"

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>

#include "csv.hpp"
#include "ibo/error.hpp"

namespace ibo {

namespace {

bool valid_pair(double dr, double theta) {
    return std::isfinite(dr) && std::isfinite(theta) && std::abs(dr) <= max_abs_delta_r + 1e-9 &&
           theta > -std::numbers::pi && theta <= std::numbers::pi;
}

}  // namespace

void ObservationSet::validate() const {
    for (const auto& o : pairs)
        if (!valid_pair(o.delta_r1, o.theta2))
            throw InvalidArgument("observation out of range (|delta_r1| <= 34, theta2 in (-pi, pi])");
}

ObservationSet ObservationSet::reflected() const {
    ObservationSet out = *this;
    for (auto& o : out.pairs)
        if (o.theta2 != std::numbers::pi) o.theta2 = -o.theta2;
    return out;
}

ObservationSet observations_from_rounds(const std::vector<Round>& rounds, std::string subject_id) {
    ObservationSet obs;
    obs.subject_id = std::move(subject_id);
    for (const auto& r : rounds) {
        if (r.reachable || r.moves.size() < 3) continue;
        const Point2 d1 = r.moves[1] - r.moves[0];
        const Point2 d2 = r.moves[2] - r.moves[1];
        if (d1.norm() == 0.0 || d2.norm() == 0.0) continue;
        obs.pairs.push_back({r.delta_r(1), relative_angle(r, 2)});
    }
    return obs;
}

void write_observations_csv(std::ostream& out, const ObservationSet& obs) {
    out << "delta_r1,theta2\n";
    for (const auto& o : obs.pairs) out << detail::fmt17(o.delta_r1) << ',' << detail::fmt17(o.theta2) << '\n';
}

ObservationSet read_observations_csv(std::istream& in, std::string subject_id) {
    using namespace detail;
    ObservationSet obs;
    obs.subject_id = std::move(subject_id);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(1, "missing header");
    ++lineno;
    if (trim(line) != "delta_r1,theta2") throw ParseError(lineno, "expected header 'delta_r1,theta2'");
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 2) throw ParseError(lineno, "expected 2 fields");
        const double dr = parse_double(f[0], lineno);
        const double th = parse_double(f[1], lineno);
        if (!valid_pair(dr, th)) throw ParseError(lineno, "value out of range");
        obs.pairs.push_back({dr, th});
    }
    return obs;
}

}  // namespace ibo
