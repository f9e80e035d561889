#include "commands.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "ibo/agents.hpp"
#include "ibo/error.hpp"
#include "ibo/inference.hpp"
#include "ibo/parallel.hpp"
#include "ibo/report.hpp"
#include "ibo/simulation.hpp"
#include "service.hpp"

namespace ibo::cli {

namespace {

using json = nlohmann::ordered_json;

struct SpecArgs {
    std::string family = "ucb";
    std::optional<double> xi, p;
    double tau_minus = 0.0, tau_plus = 0.0;
    std::string augmentation = "none";

    void add(CLI::App* cmd) {
        cmd->add_option("--family", family, "pi, ei or ucb")->check(CLI::IsMember({"pi", "ei", "ucb"}));
        cmd->add_option("--xi", xi, "PI/EI exploration parameter");
        cmd->add_option("--p", p, "UCB quantile");
        cmd->add_option("--tau-minus", tau_minus, "tau for delta_r1 < 0");
        cmd->add_option("--tau-plus", tau_plus, "tau for delta_r1 >= 0");
        cmd->add_option("--augmentation", augmentation, "none, symmetric or split")
            ->check(CLI::IsMember({"none", "symmetric", "split"}));
    }

    AcquisitionSpec spec() const {
        AcquisitionSpec s;
        s.family = parse_family(family);
        if (s.family == Family::ucb) {
            if (xi) throw InvalidArgument("--xi does not apply to ucb");
            s.param = p.value_or(0.5);
        } else {
            if (p) throw InvalidArgument("--p applies only to ucb");
            s.param = xi.value_or(0.0);
        }
        s.augmentation = parse_augmentation(augmentation);
        s.tau_minus = tau_minus;
        s.tau_plus = tau_plus;
        s.validate();
        return s;
    }

    json to_json() const {
        const auto s = spec();
        return {{"family", to_string(s.family)},   {"param", s.param},
                {"tau_minus", s.tau_minus},        {"tau_plus", s.tau_plus},
                {"augmentation", to_string(s.augmentation)}};
    }
};

struct GridArgs {
    std::string augmentation = "none";
    bool coarse_tau = false;
    std::vector<std::string> families{"pi", "ei", "ucb"};
    double r0 = 93.0;

    void add(CLI::App* cmd, bool with_augmentation = true) {
        if (with_augmentation)
            cmd->add_option("--augmentation", augmentation, "none, symmetric or split")
                ->check(CLI::IsMember({"none", "symmetric", "split"}));
        cmd->add_flag("--coarse-tau", coarse_tau, "use every second tau value");
        cmd->add_option("--families", families, "inference families")->delimiter(',');
        cmd->add_option("--r0", r0, "starting reward used to build the curves");
    }

    GridConfig config() const {
        GridConfig c;
        c.families.clear();
        for (const auto& f : families) c.families.push_back(parse_family(f));
        c.augmentation = parse_augmentation(augmentation);
        c.coarse_tau = coarse_tau;
        return c;
    }
};

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + path);
    return f;
}

ObservationSet load_observations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    auto obs = read_observations_csv(in, std::filesystem::path(path).stem().string());
    return obs;
}

std::vector<Round> load_rounds(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    return read_rounds_csv(in);
}

void write_text(const std::string& path, const std::string& text) {
    auto f = open_out(path);
    f << text;
}

int cmd_simulate(const SpecArgs& spec_args, int n, std::uint64_t seed, double w, double gamma, double r0,
                 const std::string& out_path, std::ostream& out) {
    SimConfig cfg;
    cfg.truth = spec_args.spec();
    cfg.n_obs = n;
    cfg.w = w;
    cfg.gamma = gamma;
    cfg.seed = seed;
    const AcquisitionModel model({}, {}, r0);
    const auto obs = generate_observations(cfg, model);
    if (out_path.empty()) {
        write_observations_csv(out, obs);
        return 0;
    }
    {
        auto f = open_out(out_path);
        write_observations_csv(f, obs);
    }
    json side;
    side["truth"] = spec_args.to_json();
    side["n_obs"] = n;
    side["w"] = w;
    side["gamma"] = gamma;
    side["seed"] = seed;
    side["r0"] = r0;
    side["delta_r_range"] = {cfg.delta_r_lo, cfg.delta_r_hi};
    write_text(out_path + ".json", side.dump(2) + "\n");
    return 0;
}

void write_envelope_csv(std::ostream& out, const FitResult& fit) {
    out << "delta_r,lo,hi\n";
    for (const auto& e : fit.envelope) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", e.delta_r, e.lo, e.hi);
        out << buf;
    }
}

void write_region_csv(std::ostream& out, const FitResult& fit) {
    out << "delta_r,lo,hi\n";
    for (double dr : fit.grid->tables().delta_r)
        for (const auto& iv : fit.prediction_region(dr)) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", dr, iv.lo, iv.hi);
            out << buf;
        }
}

int cmd_fit(const std::string& in_path, const GridArgs& grid_args, const std::string& weight_mode,
            std::optional<double> split, std::uint64_t seed, const std::string& out_path, const std::string& plot_dir,
            std::ostream& out) {
    const auto obs = load_observations(in_path);
    const auto grid = std::make_shared<const CandidateGrid>(precompute_grid(grid_args.config(), grid_args.r0));
    FitOptions opts;
    opts.weight_mode = weight_mode == "global" ? WeightMode::global : WeightMode::per_candidate;
    FitResult fit;
    if (split) {
        fit = validate_out_of_sample(obs, grid, *split, seed, opts).fit;
    } else {
        fit = posterior(obs, grid, opts);
    }
    const std::string text = fit_to_json(fit) + "\n";
    if (out_path.empty())
        out << text;
    else
        write_text(out_path, text);
    if (!plot_dir.empty()) {
        std::filesystem::create_directories(plot_dir);
        const std::filesystem::path dir(plot_dir);
        {
            auto f = open_out((dir / "scatter.csv").string());
            write_observations_csv(f, obs);
        }
        {
            const auto c = grid->cell(fit.map_cell());
            auto f = open_out((dir / "map_curve.csv").string());
            write_curve_csv(f, grid->curve(c.candidate, c.combo));
        }
        {
            auto f = open_out((dir / "envelope.csv").string());
            write_envelope_csv(f, fit);
        }
        {
            auto f = open_out((dir / "prediction_region.csv").string());
            write_region_csv(f, fit);
        }
    }
    return 0;
}

int cmd_compare(const std::vector<std::string>& inputs, const GridArgs& grid_args, std::uint64_t seed, double split,
                const std::string& out_path, std::ostream& out) {
    std::vector<ObservationSet> subjects;
    for (const auto& p : inputs) subjects.push_back(load_observations(p));
    CompareTable table;
    if (!subjects.empty()) {
        GridConfig cfg = grid_args.config();
        cfg.augmentation = Augmentation::split;
        const CandidateGrid base = precompute_grid(cfg, grid_args.r0);
        auto gu = std::make_shared<const CandidateGrid>(base.with_augmentation(Augmentation::none));
        auto gt = std::make_shared<const CandidateGrid>(base.with_augmentation(Augmentation::symmetric));
        auto gs = std::make_shared<const CandidateGrid>(base);
        table = model_compare(subjects, gu, gt, gs, seed, split);
    }
    if (out_path.empty()) {
        write_compare_csv(out, table);
    } else {
        auto f = open_out(out_path);
        write_compare_csv(f, table);
    }
    return 0;
}

int cmd_coverage(const SpecArgs& spec_args, bool reference_set, std::vector<int> n_obs, int reps, std::uint64_t seed,
                 double w, double gamma, const std::vector<std::string>& omit_to, const GridArgs& grid_args,
                 const std::string& out_path, std::ostream& out) {
    std::vector<AcquisitionSpec> truths;
    if (reference_set) {
        for (double xi : {1.0, 15.0, 30.0}) truths.push_back({Family::pi, xi});
        for (double xi : {0.0, 15.0, 30.0}) truths.push_back({Family::ei, xi});
        for (double p : {0.5, 0.75, 0.99}) truths.push_back({Family::ucb, p});
    } else {
        truths.push_back(spec_args.spec());
    }
    GridConfig gcfg = grid_args.config();
    gcfg.families = {Family::pi, Family::ei, Family::ucb};
    const CandidateGrid grid = precompute_grid(gcfg, grid_args.r0);
    std::vector<SimConfig> configs;
    for (const auto& t : truths)
        for (int n : n_obs) {
            SimConfig c;
            c.truth = t;
            c.n_obs = n;
            c.n_reps = reps;
            c.w = w;
            c.gamma = gamma;
            c.seed = Rng(seed).split(configs.size()).next();
            if (!omit_to.empty()) {
                c.inference_families.clear();
                for (const auto& f : omit_to) c.inference_families.push_back(parse_family(f));
            } else {
                c.inference_families = grid_args.config().families;
            }
            configs.push_back(c);
        }
    const CoverageReport report = omit_to.empty() ? coverage_study(configs, grid) : omitted_truth_study(configs, grid);
    if (out_path.empty()) {
        write_coverage_csv(out, report);
    } else {
        auto f = open_out(out_path);
        write_coverage_csv(f, report);
    }
    return 0;
}

int cmd_analyze(const std::vector<std::string>& inputs, int n_agents, int rounds_per_agent, std::uint64_t seed,
                const std::string& out_path, const std::string& corr_path, std::ostream& out) {
    std::vector<std::pair<std::string, std::vector<Round>>> subjects;
    for (const auto& p : inputs) subjects.emplace_back(std::filesystem::path(p).stem().string(), load_rounds(p));
    if (n_agents > 0) {
        const AcquisitionModel model;
        for (int a = 0; a < n_agents; ++a) {
            AgentPolicy pol;
            pol.name = "agent" + std::to_string(a);
            pol.move2_spec = AcquisitionSpec{Family::ucb, 0.5 + 0.49 * a / std::max(1, n_agents - 1)};
            pol.heading_noise = 0.6 * a / std::max(1, n_agents - 1);
            pol.move2_noise = 0.1;
            subjects.emplace_back(pol.name, simulate_agent(pol, rounds_per_agent, model, seed));
        }
    }
    const PerformanceTable table = zigzag_and_performance(subjects);
    if (out_path.empty()) {
        write_performance_csv(out, table);
    } else {
        auto f = open_out(out_path);
        write_performance_csv(f, table);
    }
    if (!corr_path.empty()) {
        auto f = open_out(corr_path);
        write_correlation_csv(f, table);
    } else {
        write_correlation_csv(out, table);
    }
    return 0;
}

int cmd_curve(const SpecArgs& spec_args, double r0, const std::string& out_path, std::ostream& out) {
    const auto curve = AcquisitionModel({}, {}, r0).curve(spec_args.spec());
    if (out_path.empty()) {
        write_curve_csv(out, curve);
    } else {
        auto f = open_out(out_path);
        write_curve_csv(f, curve);
    }
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Inverse Bayesian optimization workbench for the hotspot task"};
    app.require_subcommand(1);
    std::size_t threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = all cores)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate synthetic (delta_r1, theta2) observations");
    SpecArgs sim_spec;
    sim_spec.add(sim);
    int sim_n = 100;
    std::uint64_t sim_seed = 1;
    double sim_w = 0.5, sim_gamma = 0.25, sim_r0 = 93.0;
    std::string sim_out;
    sim->add_option("--n", sim_n, "number of observations")->check(CLI::NonNegativeNumber);
    sim->add_option("--seed", sim_seed, "random seed");
    sim->add_option("--w", sim_w, "weight of the negative mode");
    sim->add_option("--gamma", sim_gamma, "wrapped Cauchy scale");
    sim->add_option("--r0", sim_r0, "starting reward");
    sim->add_option("--out", sim_out, "output CSV (writes <out>.json sidecar)");

    // fit
    auto* fit = app.add_subcommand("fit", "grid posterior over acquisition functions");
    std::string fit_in, fit_out, fit_plots, fit_weight = "per-candidate";
    GridArgs fit_grid;
    std::optional<double> fit_split;
    std::uint64_t fit_seed = 1;
    fit->add_option("--in", fit_in, "observation CSV")->required();
    fit_grid.add(fit);
    fit->add_option("--weight-mode", fit_weight, "per-candidate or global")
        ->check(CLI::IsMember({"per-candidate", "global"}));
    fit->add_option("--split", fit_split, "train fraction for an out-of-sample fit");
    fit->add_option("--seed", fit_seed, "split seed");
    fit->add_option("--out", fit_out, "FitResult JSON path (default stdout)");
    fit->add_option("--plot-dir", fit_plots, "directory for scatter, MAP curve, envelope and region CSVs");

    // compare
    auto* cmp = app.add_subcommand("compare", "out-of-sample comparison of u, u-tau and u-tau-pm");
    std::vector<std::string> cmp_in;
    GridArgs cmp_grid;
    std::uint64_t cmp_seed = 1;
    double cmp_split = 0.8;
    std::string cmp_out;
    cmp->add_option("--in", cmp_in, "observation CSV per subject");
    cmp_grid.add(cmp, false);
    cmp->add_option("--seed", cmp_seed, "split seed");
    cmp->add_option("--split", cmp_split, "train fraction");
    cmp->add_option("--out", cmp_out, "output CSV");

    // coverage
    auto* cov = app.add_subcommand("coverage", "HPD coverage of simulated truths");
    SpecArgs cov_spec;
    cov_spec.add(cov);
    bool cov_table = false;
    std::vector<int> cov_n{100};
    int cov_reps = 200;
    std::uint64_t cov_seed = 1;
    double cov_w = 0.5, cov_gamma = 0.25;
    std::vector<std::string> cov_omit;
    GridArgs cov_grid;
    std::string cov_out;
    bool cov_full = false;
    cov->add_flag("--reference-set", cov_table, "run the nine in-class configurations");
    cov->add_option("--n-obs", cov_n, "observations per replication")->delimiter(',');
    cov->add_option("--reps", cov_reps, "replications per configuration");
    cov->add_flag("--full", cov_full, "1000 replications per configuration");
    cov->add_option("--seed", cov_seed, "random seed");
    cov->add_option("--w", cov_w, "generating weight");
    cov->add_option("--gamma", cov_gamma, "generating scale");
    cov->add_option("--infer-families", cov_omit, "families used for inference (omitted-truth study)")->delimiter(',');
    cov->add_option("--r0", cov_grid.r0, "starting reward used to build the curves");
    cov->add_option("--out", cov_out, "output CSV");

    // analyze
    auto* ana = app.add_subcommand("analyze", "zig-zag and score metrics per subject");
    std::vector<std::string> ana_in;
    int ana_agents = 0, ana_rounds = 200;
    std::uint64_t ana_seed = 1;
    std::string ana_out, ana_corr;
    ana->add_option("--rounds", ana_in, "round CSV per subject");
    ana->add_option("--simulate-agents", ana_agents, "add this many scripted agents");
    ana->add_option("--rounds-per-agent", ana_rounds, "rounds per scripted agent");
    ana->add_option("--seed", ana_seed, "agent seed");
    ana->add_option("--out", ana_out, "metrics CSV");
    ana->add_option("--corr-out", ana_corr, "correlation CSV");

    // curve
    auto* crv = app.add_subcommand("curve", "acquisition curve over the delta_r1 grid");
    SpecArgs crv_spec;
    crv_spec.add(crv);
    double crv_r0 = 93.0;
    std::string crv_out;
    crv->add_option("--r0", crv_r0, "starting reward");
    crv->add_option("--out", crv_out, "output CSV");

    // serve
    auto* srv = app.add_subcommand("serve", "HTTP API for the interactive task");
    std::string srv_host = "127.0.0.1", srv_data;
    int srv_port = 8080;
    bool srv_coarse = false;
    srv->add_option("--host", srv_host, "bind address");
    srv->add_option("--port", srv_port, "port");
    srv->add_option("--data-dir", srv_data, "persistence root (default $IBO_DATA_DIR or ./ibo_data)");
    srv->add_flag("--coarse-tau", srv_coarse, "coarse tau grid for augmented fits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }
    parallel_threads() = threads;

    try {
        if (*sim) return cmd_simulate(sim_spec, sim_n, sim_seed, sim_w, sim_gamma, sim_r0, sim_out, out);
        if (*fit) return cmd_fit(fit_in, fit_grid, fit_weight, fit_split, fit_seed, fit_out, fit_plots, out);
        if (*cmp) return cmd_compare(cmp_in, cmp_grid, cmp_seed, cmp_split, cmp_out, out);
        if (*cov)
            return cmd_coverage(cov_spec, cov_table, cov_n, cov_full ? 1000 : cov_reps, cov_seed, cov_w, cov_gamma,
                                cov_omit, cov_grid, cov_out, out);
        if (*ana) return cmd_analyze(ana_in, ana_agents, ana_rounds, ana_seed, ana_out, ana_corr, out);
        if (*crv) return cmd_curve(crv_spec, crv_r0, crv_out, out);
        if (*srv) {
            service::ServiceConfig cfg;
            if (!srv_data.empty())
                cfg.data_dir = srv_data;
            else if (const char* env = std::getenv("IBO_DATA_DIR"))
                cfg.data_dir = env;
            cfg.coarse_tau = srv_coarse;
            err << "serving on " << srv_host << ':' << srv_port << " data " << cfg.data_dir.string() << '\n';
            return service::serve(cfg, srv_host, srv_port);
        }
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace ibo::cli
