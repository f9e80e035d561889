#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ibo/inference.hpp"

namespace ibo {

struct ReportOptions {
    /// delta_r values at which prediction regions are reported.
    std::vector<double> region_delta_r{-30.0, -20.0, -10.0, -5.0, 0.0, 5.0, 10.0, 20.0, 30.0};
    std::size_t max_hpd_cells = 2000;
};

/// FitResult as JSON with a fixed key order.
std::string fit_to_json(const FitResult& fit, const ReportOptions& options = {});

void write_compare_csv(std::ostream& out, const CompareTable& table);

}  // namespace ibo
