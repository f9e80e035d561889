#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ibo/acquisition.hpp"
#include "ibo/task.hpp"

namespace ibo {

/// A scripted player. Move 1 heads in a uniformly random direction, move 2
/// follows the acquisition argmax (or a fixed angle), later moves follow the
/// surrogate mean gradient. Every heading gets optional wrapped Cauchy noise.
struct AgentPolicy {
    std::string name = "agent";
    std::optional<AcquisitionSpec> move2_spec;
    /// Used when move2_spec is unset; the sign is drawn at random.
    double move2_angle = 0.0;
    double move2_noise = 0.0;
    double heading_noise = 0.0;
    /// Weight of the negative mode on move 2.
    double w = 0.5;
};

/// Plays the same rounds (hotspot, k, length, move-1 direction) for every
/// policy given the same seed.
std::vector<Round> simulate_agent(const AgentPolicy& policy, std::size_t n_rounds, const AcquisitionModel& model,
                                  std::uint64_t seed);

struct PerformanceRow {
    std::string subject;
    std::size_t n_rounds = 0;
    double mean_dr2 = 0.0;
    double mean_dr3 = 0.0;
    double mean_total_dr = 0.0;
    double mean_zigzag = 0.0;
};

inline constexpr int n_performance_metrics = 4;
const char* performance_metric_name(int i);

struct PerformanceTable {
    std::vector<PerformanceRow> rows;
    /// Pearson correlations across subjects; unset where a column is constant.
    std::optional<double> corr[n_performance_metrics][n_performance_metrics];
};

/// Sum over moves 4 and later of |relative heading change|.
double zigzag(const Round& round);

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

PerformanceTable zigzag_and_performance(const std::vector<std::pair<std::string, std::vector<Round>>>& subjects);

void write_performance_csv(std::ostream& out, const PerformanceTable& table);
void write_correlation_csv(std::ostream& out, const PerformanceTable& table);

}  // namespace ibo
