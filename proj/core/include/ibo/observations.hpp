#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ibo/task.hpp"

namespace ibo {

struct Observation {
    double delta_r1 = 0.0;
    double theta2 = 0.0;
    friend bool operator==(const Observation&, const Observation&) = default;
};

struct ObservationSet {
    std::vector<Observation> pairs;
    std::string subject_id;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
    void validate() const;
    /// Same data with every theta2 mapped to -theta2.
    ObservationSet reflected() const;

    friend bool operator==(const ObservationSet&, const ObservationSet&) = default;
};

inline constexpr double max_abs_delta_r = 34.0;

/// (delta_r1, theta2) from every complete, unreachable round with nonzero
/// first two displacements.
ObservationSet observations_from_rounds(const std::vector<Round>& rounds, std::string subject_id = {});

void write_observations_csv(std::ostream& out, const ObservationSet& obs);
/// Throws ParseError carrying the 1-based line of the first bad row.
ObservationSet read_observations_csv(std::istream& in, std::string subject_id = {});

}  // namespace ibo
