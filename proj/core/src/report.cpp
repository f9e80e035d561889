#include "ibo/report.hpp"

#include <json.hpp>
#include <ostream>

#include "csv.hpp"

namespace ibo {

namespace {

using json = nlohmann::ordered_json;

json cell_json(const FitResult& fit, std::size_t cell) {
    const auto& g = *fit.grid;
    const auto c = g.cell(cell);
    const auto spec = g.spec(c.candidate, c.combo);
    json j;
    j["family"] = to_string(spec.family);
    j["param"] = spec.param;
    j["tau_minus"] = spec.tau_minus;
    j["tau_plus"] = spec.tau_plus;
    j["gamma"] = g.gamma()[c.gamma];
    j["w"] = fit.w_hat(cell);
    return j;
}

}  // namespace

std::string fit_to_json(const FitResult& fit, const ReportOptions& options) {
    json j;
    j["subject_id"] = fit.subject_id;
    j["n_obs"] = fit.n_obs;
    j["augmentation"] = to_string(fit.grid->augmentation());
    j["weight_mode"] = fit.weight_mode == WeightMode::global ? "global" : "per_candidate";
    j["map"] = cell_json(fit, fit.map_cell());
    j["map_ties"] = fit.map_cells.size();
    j["log_evidence"] = fit.log_evidence;
    j["hpd_mass"] = fit.hpd_mass;
    j["hpd_size"] = fit.hpd_size;
    json cells = json::array();
    for (std::size_t i = 0; i < fit.hpd_size && i < options.max_hpd_cells; ++i) {
        json c = cell_json(fit, fit.ranked[i].cell);
        c["prob"] = fit.ranked[i].prob;
        cells.push_back(std::move(c));
    }
    j["hpd_cells"] = std::move(cells);
    json env = json::array();
    for (const auto& e : fit.envelope) env.push_back({{"delta_r", e.delta_r}, {"lo", e.lo}, {"hi", e.hi}});
    j["envelope"] = std::move(env);
    json region = json::array();
    for (double dr : options.region_delta_r) {
        json iv = json::array();
        for (const auto& r : fit.prediction_region(dr)) iv.push_back({r.lo, r.hi});
        region.push_back({{"delta_r", dr}, {"intervals", std::move(iv)}});
    }
    j["prediction_region"] = std::move(region);
    j["n_exact"] = fit.n_exact;
    j["n_screened"] = fit.n_screened;
    j["train_ll"] = fit.train_loglik;
    j["test_ll"] = fit.test_loglik ? json(*fit.test_loglik) : json(nullptr);
    return j.dump(2);
}

void write_compare_csv(std::ostream& out, const CompareTable& table) {
    using detail::fmt17;
    static const char* names[3] = {"u", "u_tau", "u_taupm"};
    out << "subject,n_obs,test_ll_u,test_ll_u_tau,test_ll_u_taupm,best\n";
    for (const auto& r : table.rows)
        out << r.subject_id << ',' << r.n_obs << ',' << fmt17(r.test_ll[0]) << ',' << fmt17(r.test_ll[1]) << ','
            << fmt17(r.test_ll[2]) << ',' << names[r.best] << '\n';
    if (!table.rows.empty())
        out << "total,," << fmt17(table.total[0]) << ',' << fmt17(table.total[1]) << ',' << fmt17(table.total[2])
            << ',' << names[table.best_total] << '\n';
}

}  // namespace ibo
