// harvest: command line front end for the optimal-harvesting toolkit.
// Every number printed here comes from a library call.

#include "harvest/config.hpp"
#include "harvest/error.hpp"
#include "harvest/montecarlo.hpp"
#include "harvest/oclp.hpp"
#include "harvest/pipeline.hpp"
#include "harvest/serialize.hpp"
#include "harvest/value.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace harvest;

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kUsage = 2, kNumeric = 3 };

struct Globals {
    std::string config;
    std::string out;
    std::string format = "json";
};

void write_text(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) fail(ErrorKind::Config, "cli", "cannot write '" + p.string() + "'");
    f << text;
}

RunConfig need_config(const Globals& g) {
    if (g.config.empty()) fail(ErrorKind::Config, "cli", "--config PATH is required");
    return load_config(g.config);
}

// Override list wins over the config's x0.
std::vector<double> pick_x0(const RunConfig& cfg, const std::vector<double>& cli) {
    const std::vector<double>& xs = cli.empty() ? cfg.x0 : cli;
    for (double x : xs) {
        if (!(x > 0.0)) fail(ErrorKind::Config, "cli", "x0 must be > 0");
    }
    return xs;
}

std::vector<double> psi_points(const FundamentalSolution& fs, double scale, int n) {
    // half log-spaced near 0, half linear
    std::vector<double> xs;
    const double lo = std::max(fs.x_min(), 1e-6 * scale);
    const double hi = fs.x_max();
    const int half = std::max(2, n / 2);
    const double knee = std::min(0.1 * hi, scale);
    for (int i = 0; i < half; ++i) xs.push_back(lo * std::pow(knee / lo, static_cast<double>(i) / half));
    for (int i = 0; i < n - half; ++i) xs.push_back(knee + (hi - knee) * static_cast<double>(i) / (n - half - 1));
    if (fs.x_min() == 0.0) xs.insert(xs.begin(), 0.0);
    return xs;
}

int emit(const Globals& g, const std::string& json, const std::string& csv, const std::string& file_stem) {
    const std::string& body = g.format == "csv" ? csv : json;
    std::cout << body;
    if (!g.out.empty()) write_text(fs::path(g.out) / (file_stem + (g.format == "csv" ? ".csv" : ".json")), body);
    return kPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal harvesting of a diffusing population: thresholds, values, simulation and LP bounds"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    Globals g;
    app.add_option("--config", g.config, "JSON run configuration");
    app.add_option("--out", g.out, "Directory for output files");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

    auto* classify = app.add_subcommand("classify", "Feller classification of the boundary at 0");
    auto* psi = app.add_subcommand("psi", "Tabulate the increasing fundamental solution");
    int psi_n = 200;
    bool psi_numeric = false;
    psi->add_option("--points", psi_n, "Number of sample points")->check(CLI::Range(4, 1000000));
    psi->add_flag("--numeric", psi_numeric, "Integrate the ODE even when a closed form exists");

    auto* threshold = app.add_subcommand("threshold", "Optimal barrier b* and condition checks");

    auto* value = app.add_subcommand("value", "Closed-form value at each x0");
    std::vector<double> value_x0;
    value->add_option("--x0", value_x0, "Initial populations (overrides config)");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo payoff of a harvesting policy");
    std::string policy = "reflect";
    std::optional<double> sim_b;
    int sim_n = 1;
    double sim_x0 = 0.0;
    std::optional<double> sim_dt, sim_T;
    std::optional<std::size_t> sim_paths;
    std::optional<std::uint64_t> sim_seed;
    std::string paths_csv;
    simulate->add_option("--policy", policy, "reflect | jump | chatter | sweep")
        ->check(CLI::IsMember({"reflect", "jump", "chatter", "sweep"}));
    simulate->add_option("--b", sim_b, "Barrier (default b*)");
    simulate->add_option("--n", sim_n, "Chatter steps")->check(CLI::PositiveNumber);
    simulate->add_option("--x0", sim_x0, "Initial population")->required();
    simulate->add_option("--dt", sim_dt, "Time step");
    simulate->add_option("--T", sim_T, "Horizon");
    simulate->add_option("--paths", sim_paths, "Number of paths");
    simulate->add_option("--seed", sim_seed, "RNG seed");
    simulate->add_option("--paths-csv", paths_csv, "Write per-path payoffs to this file");

    auto* lp = app.add_subcommand("lp", "Occupation-measure LP bounds");
    std::string lp_mode = "full";
    double lp_x0 = 0.0;
    std::optional<std::size_t> lp_states, lp_basis;
    std::optional<int> lp_levels;
    std::optional<double> lp_xmax;
    bool no_psi_row = false;
    lp->add_option("--mode", lp_mode, "full | aux | mu1star")->check(CLI::IsMember({"full", "aux", "mu1star"}));
    lp->add_option("--x0", lp_x0, "Initial population")->required();
    lp->add_option("--states", lp_states, "Measure grid states");
    lp->add_option("--basis", lp_basis, "Test-function basis size");
    lp->add_option("--jump-levels", lp_levels, "Jump sizes per state");
    lp->add_option("--x-max", lp_xmax, "Truncation of the state space");
    lp->add_flag("--no-psi-row", no_psi_row, "Drop the constraint generated by psi");

    auto* verify = app.add_subcommand("verify", "Run every applicable check; exit 1 on any failure");
    auto* report = app.add_subcommand("report", "Write the report tables into --out (or the config's directory)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kPass : kUsage;
    }

    try {
        const RunConfig cfg = need_config(g);
        const ModelSpec& m = cfg.model;

        if (*classify) {
            const FellerSweep sweep = feller_sweep(m);
            const BoundaryClass bc = classify_boundary_zero(m);
            std::cout << classify_json(m, bc, sweep);
            if (!g.out.empty()) write_text(fs::path(g.out) / "classify.json", classify_json(m, bc, sweep));
            return kPass;
        }
        if (*psi) {
            GridParams gp = cfg.grid;
            if (psi_numeric) gp.use_closed_form = false;
            const BoundaryClass bc = classify_boundary_zero(m);
            const FundamentalSolution f = solve_fundamental(m, bc, gp);
            const std::string csv = psi_csv(m, f, psi_points(f, m.scale(), psi_n));
            std::cout << csv;
            if (!g.out.empty()) write_text(fs::path(g.out) / "psi.csv", csv);
            return kPass;
        }

        const SolvedModel sm = solve_model(m, cfg.grid);
        const Threshold& th = sm.threshold;

        if (*threshold) {
            std::cout << threshold_json(m, th);
            if (!g.out.empty()) write_text(fs::path(g.out) / "threshold.json", threshold_json(m, th));
            return th.report.all_ok() ? kPass : kCheckFailed;
        }
        if (*value) {
            std::vector<ValueBreakdown> rows;
            for (double x : pick_x0(cfg, value_x0)) rows.push_back(value_at(m, sm.psi, th, x));
            const std::string csv = value_csv(rows);
            std::cout << csv;
            if (!g.out.empty()) write_text(fs::path(g.out) / "value.csv", csv);
            return kPass;
        }
        if (*simulate) {
            SimConfig sc = cfg.sim.value_or(SimConfig{});
            if (!cfg.sim) sc.dt = 1e-3 / m.discount();
            if (!cfg.sim && !sim_seed) fail(ErrorKind::Config, "cli", "simulate needs --seed or a sim block with a seed");
            if (sim_dt) sc.dt = *sim_dt;
            if (sim_T) sc.horizon = *sim_T;
            if (sim_paths) sc.n_paths = *sim_paths;
            if (sim_seed) sc.seed = *sim_seed;
            sc.keep_path_payoffs = !paths_csv.empty();
            const double b = sim_b.value_or(th.bstar);
            PolicySpec pol = ReflectAt{b};
            if (policy == "jump") pol = JumpThenReflect{b};
            if (policy == "chatter") pol = Chatter{b, sim_n};
            if (policy == "sweep") pol = RelaxedSweep{b};
            const SimResult r = simulate_payoff(m, pol, sim_x0, sc);
            if (!paths_csv.empty()) write_text(paths_csv, path_payoffs_csv(r));
            const std::string csv = csv_line({"policy", "x0", "mean", "std_error", "n_paths", "extinct_fraction"}) +
                                    csv_line({describe(pol), format_double(sim_x0), format_double(r.mean),
                                              format_double(r.std_error), std::to_string(r.n_paths),
                                              format_double(r.extinct_fraction)});
            return emit(g, sim_json(pol, sim_x0, r), csv, "simulate");
        }
        if (*lp) {
            LPConfig lc = cfg.lp;
            if (lp_states) lc.grid.n_states = *lp_states;
            if (lp_basis) lc.basis_size = *lp_basis;
            if (lp_levels) lc.grid.jump_levels = *lp_levels;
            if (lp_xmax) lc.grid.x_max = *lp_xmax;
            if (no_psi_row) lc.psi_row = false;
            if (lp_mode == "mu1star") {
                std::vector<Mu1StarReport> rows;
                for (std::size_t n : lc.mu1star_intervals) rows.push_back(feasibility_check_mu1star(m, sm.psi, th, lp_x0, n));
                std::string csv = csv_line({"n_intervals", "constraint_residual", "objective", "value", "atom_weight"});
                for (const auto& r : rows) {
                    csv += csv_line({std::to_string(r.n_intervals), format_double(r.constraint_residual),
                                     format_double(r.objective), format_double(r.value), format_double(r.atom_weight)});
                }
                return emit(g, mu1star_json(rows), csv, "mu1star");
            }
            const LPRun run = run_lp(m, sm, lp_x0, lp_mode == "aux" ? LPMode::Aux : LPMode::Full, lc);
            std::cout << lp_json(run);
            if (!g.out.empty()) {
                write_text(fs::path(g.out) / "lp.json", lp_json(run));
                write_text(fs::path(g.out) / "active_constraints.csv", active_rows_csv(run));
            }
            return run.solution.status == LPStatus::Optimal ? kPass : kNumeric;
        }
        if (*verify) {
            const VerifyReport rep = run_verify(cfg);
            const std::string doc = verify_json(rep);
            std::cout << doc;
            if (!g.out.empty()) write_text(fs::path(g.out) / "verify.json", doc);
            return rep.overall() ? kPass : kCheckFailed;
        }
        if (*report) {
            run_report(cfg, g.out.empty() ? fs::path(cfg.output.directory) : fs::path(g.out));
            return kPass;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
            case ErrorKind::Config:
            case ErrorKind::Domain: return kUsage;
            case ErrorKind::Numeric:
            case ErrorKind::Solver: return kNumeric;
        }
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumeric;
    }
    return kUsage;
}
