#include "harvest/serialize.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>

namespace harvest {

using ojson = nlohmann::ordered_json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += fields[i];
    }
    out += '\n';
    return out;
}

namespace {

// JSON has no infinities; they travel as strings so nothing is silently nulled.
ojson num(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

ojson model_json(const ModelSpec& m) {
    ojson j;
    j["family"] = std::string(m.family_name());
    j["yield"] = std::string(m.yield_name());
    j["discount"] = num(m.discount());
    return j;
}

ojson threshold_obj(const Threshold& th) {
    ojson j;
    j["bstar"] = num(th.bstar);
    j["h_max"] = num(th.h_max);
    j["at_domain_edge"] = th.at_domain_edge;
    j["conditions"] = {{"i", th.report.cond_i_ok},
                       {"ii", th.report.cond_ii_ok},
                       {"iii", th.report.cond_iii_ok},
                       {"worst_violation", num(th.report.worst_violation)},
                       {"witness_x", num(th.report.witness_x)}};
    return j;
}

ojson lp_obj(const LPRun& run) {
    ojson j;
    j["mode"] = run.mode == LPMode::Full ? "full" : "aux";
    j["x0"] = num(run.x0);
    j["status"] = std::string(to_string(run.solution.status));
    j["value"] = num(run.solution.objective);
    j["rows"] = run.instance.rows();
    j["columns"] = run.instance.cols();
    j["states"] = run.n_states;
    j["iterations"] = run.solution.iterations;
    j["max_row_violation"] = num(run.solution.max_row_violation);
    j["max_row_violation_rel"] = num(run.solution.max_row_violation_rel);
    ojson atoms = ojson::array();
    for (const SupportAtom& a : run.support) {
        atoms.push_back({{"kind", std::string(to_string(a.kind))}, {"x", num(a.x)}, {"z", num(a.z)}, {"weight", num(a.weight)}});
    }
    j["support"] = atoms;
    return j;
}

}  // namespace

std::string classify_json(const ModelSpec& m, BoundaryClass bc, const FellerSweep& sweep) {
    ojson j;
    j["model"] = model_json(m);
    j["boundary"] = std::string(to_string(bc));
    j["sigma_finite"] = sweep.sigma_finite;
    j["n_finite"] = sweep.n_finite;
    ojson rows = ojson::array();
    for (std::size_t i = 0; i < sweep.epsilons.size(); ++i) {
        rows.push_back({{"epsilon", num(sweep.epsilons[i])}, {"log_sigma", num(sweep.log_sigma[i])}, {"log_n", num(sweep.log_n[i])}});
    }
    j["sweep"] = rows;
    return dump(j);
}

std::string threshold_json(const ModelSpec& m, const Threshold& th) {
    ojson j;
    j["model"] = model_json(m);
    j.update(threshold_obj(th));
    return dump(j);
}

std::string sim_json(const PolicySpec& policy, double x0, const SimResult& r) {
    ojson j;
    j["policy"] = describe(policy);
    j["x0"] = num(x0);
    j["mean"] = num(r.mean);
    j["std_error"] = num(r.std_error);
    j["n_paths"] = r.n_paths;
    j["extinct_fraction"] = num(r.extinct_fraction);
    j["lump_term"] = num(r.lump_term);
    j["tail_bound"] = num(r.tail_bound);
    j["horizon"] = num(r.horizon);
    j["dt"] = num(r.dt);
    return dump(j);
}

std::string lp_json(const LPRun& run) { return dump(lp_obj(run)); }

std::string lp_summary_json(const ModelSpec& m, const Threshold& th, const std::vector<LPRun>& runs) {
    ojson j;
    j["model"] = model_json(m);
    j["threshold"] = threshold_obj(th);
    ojson arr = ojson::array();
    for (const LPRun& r : runs) {
        ojson o = lp_obj(r);
        o.erase("support");
        arr.push_back(o);
    }
    j["runs"] = arr;
    return dump(j);
}

std::string mu1star_json(const std::vector<Mu1StarReport>& rows) {
    ojson arr = ojson::array();
    for (const Mu1StarReport& r : rows) {
        arr.push_back({{"n_intervals", r.n_intervals},
                       {"constraint_residual", num(r.constraint_residual)},
                       {"objective", num(r.objective)},
                       {"value", num(r.value)},
                       {"atom_weight", num(r.atom_weight)}});
    }
    ojson j;
    j["mode"] = "mu1star";
    j["rows"] = arr;
    return dump(j);
}

std::string verify_json(const VerifyReport& report) {
    ojson arr = ojson::array();
    for (const CheckEntry& e : report.entries) {
        arr.push_back({{"name", e.name},
                       {"pass", e.pass},
                       {"measured", num(e.measured)},
                       {"target", num(e.target)},
                       {"tolerance", num(e.tolerance)}});
    }
    ojson j;
    j["overall"] = report.overall();
    j["checks"] = arr;
    return dump(j);
}

std::string psi_csv(const ModelSpec& m, const FundamentalSolution& fs, const std::vector<double>& xs) {
    std::string out = csv_line({"x", "psi", "dpsi", "ddpsi", "residual"});
    for (double x : xs) {
        out += csv_line({format_double(x), format_double(psi_at(fs, x)), format_double(dpsi_at(fs, x)),
                         format_double(ddpsi_at(fs, x)), format_double(psi_residual_at(m, fs, x))});
    }
    return out;
}

std::string value_csv(const std::vector<ValueBreakdown>& rows) {
    std::string out = csv_line({"x0", "branch", "sweep_term", "reflect_term", "total"});
    for (const ValueBreakdown& v : rows) {
        out += csv_line({format_double(v.x0), std::string(to_string(v.branch)), format_double(v.sweep_term),
                         format_double(v.reflect_term), format_double(v.total)});
    }
    return out;
}

std::string path_payoffs_csv(const SimResult& r) {
    std::string out = csv_line({"path", "payoff"});
    for (std::size_t i = 0; i < r.path_payoffs.size(); ++i) {
        out += csv_line({std::to_string(i), format_double(r.path_payoffs[i])});
    }
    return out;
}

std::string active_rows_csv(const LPRun& run) {
    std::string out = csv_line({"row", "sense", "activity", "rhs", "dual"});
    const auto& rows = run.solution.rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].active) continue;
        out += csv_line({run.instance.row_names[i], run.instance.senses[i] == RowSense::Equal ? "eq" : "le",
                         format_double(rows[i].activity), format_double(rows[i].rhs), format_double(rows[i].dual)});
    }
    return out;
}

std::string chatter_csv(const ChatterTable& table) {
    std::string out = csv_line({"n", "lump", "payoff", "sweep_lump", "lump_gap"});
    for (const ChatterRow& r : table.rows) {
        out += csv_line({std::to_string(r.n), format_double(r.lump), format_double(r.payoff),
                         format_double(table.sweep_lump), format_double(table.sweep_lump - r.lump)});
    }
    return out;
}

}  // namespace harvest
