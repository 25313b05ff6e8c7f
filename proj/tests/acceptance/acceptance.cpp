// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "harvest/config.hpp"
#include "harvest/montecarlo.hpp"
#include "harvest/oclp.hpp"
#include "harvest/pipeline.hpp"
#include "harvest/psi.hpp"
#include "harvest/serialize.hpp"
#include "harvest/threshold.hpp"
#include "harvest/value.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace harvest;

namespace {

namespace tol {
constexpr double psi_rel = 1e-6;
constexpr double psi_residual = 1e-6;
constexpr double psi_seconds = 1.0;
constexpr double bstar_abs = 1e-5;
constexpr double threshold_seconds = 1.0;
constexpr double value_continuity = 1e-10;
constexpr double value_ratio = 1e-10;
constexpr double generator_slack = 1e-9;
constexpr double mc_se_mult = 3.0;
constexpr double mc_rel = 0.015;
constexpr double mc_seconds = 60.0;
constexpr double chatter_gap = 1e-3;
constexpr double aux_rel = 1e-6;
constexpr double aux_support = 1e-9;
constexpr double aux_seconds = 5.0;
constexpr double chain = 1e-6;
constexpr double truncation = 0.05;
constexpr double mu1_order = 1.95;
constexpr double mu1_objective = 1e-8;
}  // namespace tol

const double kLambdaPlus = (-1.0 + std::sqrt(5.0)) / 2.0;
const double kLambdaMinus = (-1.0 - std::sqrt(5.0)) / 2.0;

double psi_exact(double x) { return std::exp(kLambdaPlus * x) - std::exp(kLambdaMinus * x); }

ModelSpec drifted(YieldFn f = ConstantYield{1.0}, double sigma = std::sqrt(2.0)) {
    return ModelSpec(DriftedBM{1.0, sigma}, 1.0, f);
}

// strictly decreasing yield with an interior threshold
ModelSpec decreasing() { return drifted(ExponentialYield{1.0, 1.0}, 1.0); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [fail]");
    }
};

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

SolvedModel solved(const ModelSpec& m, bool closed_form = true) {
    GridParams gp;
    gp.use_closed_form = closed_form;
    return solve_model(m, gp);
}

Outcome psi_correctness() {
    Outcome o;
    const ModelSpec m = drifted();
    const auto t0 = std::chrono::steady_clock::now();
    GridParams gp;
    gp.use_closed_form = false;
    const FundamentalSolution fs = solve_fundamental(m, classify_boundary_zero(m), gp);
    const double elapsed = seconds_since(t0);

    const double c = psi_exact(1.0) / psi_at(fs, 1.0);
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        const double x = 1e-4 * std::pow(1e5, i / 2000.0);
        worst = std::max(worst, std::abs(c * psi_at(fs, x) / psi_exact(x) - 1.0));
    }
    double residual = 0.0;
    const auto g = fs.grid();
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        for (double x : {g[i], 0.5 * (g[i] + g[i + 1])}) {
            residual = std::max(residual, std::abs(psi_residual_at(m, fs, x)) / (1.0 + m.discount() * std::abs(psi_at(fs, x))));
        }
    }
    o.require(worst <= tol::psi_rel, "max rel error " + num(worst));
    o.require(residual <= tol::psi_residual, "max residual " + num(residual));
    o.require(elapsed < tol::psi_seconds, "solve " + num(elapsed) + " s");
    return o;
}

Outcome threshold_fixture() {
    Outcome o;
    const ModelSpec m = drifted();
    const auto t0 = std::chrono::steady_clock::now();
    const SolvedModel sm = solved(m, false);
    const double elapsed = seconds_since(t0);
    const double exact = 2.0 * std::log(-kLambdaMinus / kLambdaPlus) / (kLambdaPlus - kLambdaMinus);
    const double err = std::abs(sm.threshold.bstar - exact);
    o.require(err <= tol::bstar_abs, "b* " + num(sm.threshold.bstar) + " vs " + num(exact));
    o.require(sm.threshold.report.all_ok(), "conditions (i)-(iii)");
    o.require(elapsed < tol::threshold_seconds, "solve " + num(elapsed) + " s");
    return o;
}

Outcome value_formula() {
    Outcome o;
    const ModelSpec m = drifted();
    const SolvedModel sm = solved(m);
    const Threshold& th = sm.threshold;
    const double at = value_at(m, sm.psi, th, th.bstar).total;
    const double above = value_at(m, sm.psi, th, th.bstar * (1.0 + 1e-12)).total;
    const double jump = std::abs(above - at) / at;
    const double ratio = yield_at(m, th.bstar) / dpsi_at(sm.psi, th.bstar);
    double worst = 0.0;
    for (int i = 1; i <= 50; ++i) {
        const double x0 = th.bstar * i / 50.0;
        worst = std::max(worst, std::abs(value_at(m, sm.psi, th, x0).total / psi_at(sm.psi, x0) / ratio - 1.0));
    }
    o.require(jump <= tol::value_continuity, "gap at b* " + num(jump));
    o.require(worst <= tol::value_ratio, "lower-branch ratio error " + num(worst));
    return o;
}

Outcome generator_bound() {
    Outcome o;
    const ModelSpec models[] = {drifted(), ModelSpec(GBM{0.05, 0.3}, 0.1, ConstantYield{1.0}),
                                ModelSpec(Logistic{1.0, 1.0, 0.5}, 0.5, RationalYield{1.0, 0.5})};
    for (const ModelSpec& m : models) {
        const SolvedModel sm = solved(m);
        const double b = sm.threshold.bstar, hi = sm.psi.x_max();
        std::vector<double> grid;
        for (int i = 1; i <= 500; ++i) grid.push_back(b + (hi - b) * i / 500.0);
        const InequalityReport rep = check_generator_bound(m, sm.psi, sm.threshold, grid);
        o.require(rep.max_violation <= tol::generator_slack && rep.n_checked == 500,
                  std::string(m.family_name()) + " worst slack " + num(-rep.max_violation));
    }
    return o;
}

Outcome monte_carlo() {
    Outcome o;
    const ModelSpec m = drifted();
    const SolvedModel sm = solved(m);
    const Threshold& th = sm.threshold;
    SimConfig sc;
    sc.dt = 1e-3;
    sc.n_paths = 40000;
    sc.seed = 20240601;
    const auto t0 = std::chrono::steady_clock::now();
    const SimResult reflect = simulate_payoff(m, ReflectAt{th.bstar}, th.bstar, sc);
    const SimResult sweep = simulate_payoff(m, RelaxedSweep{th.bstar}, 2.0, sc);
    const double elapsed = seconds_since(t0);
    const auto within = [](const SimResult& r, double target) {
        return std::abs(r.mean - target) <= std::max(tol::mc_se_mult * r.std_error, tol::mc_rel * std::abs(target));
    };
    const double v_b = reflect_value_at_bstar(m, sm.psi, th);
    const double v_2 = value_at(m, sm.psi, th, 2.0).total;
    o.require(std::exp(-m.discount() * reflect.horizon) <= 1e-4 * (1.0 + 1e-12), "horizon " + num(reflect.horizon));
    o.require(within(reflect, v_b), "reflect " + num(reflect.mean) + " vs " + num(v_b) + " (se " + num(reflect.std_error) + ")");
    o.require(within(sweep, v_2), "sweep " + num(sweep.mean) + " vs " + num(v_2) + " (se " + num(sweep.std_error) + ")");
    o.require(elapsed < tol::mc_seconds, "simulate " + num(elapsed) + " s");
    return o;
}

Outcome jump_suboptimality() {
    Outcome o;
    const ModelSpec m = decreasing();
    const SolvedModel sm = solved(m);
    const Threshold& th = sm.threshold;
    const double x0 = 2.0 * th.bstar;
    o.require(th.bstar > 0.0, "b* " + num(th.bstar));

    SimConfig sc;
    sc.dt = 1e-3;
    sc.n_paths = 40000;
    sc.seed = 7;
    const SimResult jump = simulate_payoff(m, JumpThenReflect{th.bstar}, x0, sc);
    sc.seed = 8;  // independent streams, so the noise does not cancel
    const SimResult sweep = simulate_payoff(m, RelaxedSweep{th.bstar}, x0, sc);
    const double gap = sweep.mean - jump.mean;
    const double analytic = yield_integral(m, th.bstar, x0) - yield_at(m, x0) * (x0 - th.bstar);
    const double se = std::hypot(jump.std_error, sweep.std_error);
    o.require(analytic > 0.0 && std::abs(gap - analytic) <= tol::mc_se_mult * se,
              "gap " + num(gap) + " vs " + num(analytic) + " (se " + num(se) + ")");

    std::vector<int> ns;
    for (int n = 1; n <= 64; n *= 2) ns.push_back(n);
    sc.n_paths = 4000;
    const ChatterTable table = chatter_convergence(m, th, x0, sc, ns);
    bool monotone = true;
    for (std::size_t i = 1; i < table.rows.size(); ++i) monotone = monotone && table.rows[i].payoff >= table.rows[i - 1].payoff;
    const double last_gap = table.sweep_lump - table.rows.back().lump;
    o.require(monotone, "chatter payoffs nondecreasing");
    o.require(std::abs(last_gap) <= tol::chatter_gap, "n=64 short of sweep by " + num(last_gap));
    return o;
}

std::pair<double, double> bstar_share(const LPRun& run, double b) {
    double at_b = 0.0, total = 0.0;
    const double z_cut = (1.0 + 1e-9) * MeasureGridParams{}.z_min_rel;
    for (const SupportAtom& a : run.support) {
        total += a.weight;
        // the smallest jump at b* ties with reflection there (psi''(b*) = 0)
        if (std::abs(a.x - b) <= 1e-12 * b && a.z <= z_cut * a.x) at_b += a.weight;
    }
    return {at_b, total};
}

Outcome aux_exactness() {
    Outcome o;
    const ModelSpec m = drifted();
    const SolvedModel sm = solved(m);
    const Threshold& th = sm.threshold;
    const auto t0 = std::chrono::steady_clock::now();
    for (double x0 : {0.5 * th.bstar, th.bstar}) {
        const LPRun aux = run_lp(m, sm, x0, LPMode::Aux, LPConfig{});
        const double target = yield_at(m, th.bstar) * psi_at(sm.psi, x0) / dpsi_at(sm.psi, th.bstar);
        const double rel = std::abs(aux.solution.objective / target - 1.0);
        const auto [at_b, total] = bstar_share(aux, th.bstar);
        o.require(aux.solution.status == LPStatus::Optimal && rel <= tol::aux_rel, "x0=" + num(x0) + " rel error " + num(rel));
        o.require(total > 0.0 && std::abs(at_b / total - 1.0) <= tol::aux_support, "share at (b*,0) " + num(total > 0 ? at_b / total : 0.0));
    }
    const double elapsed = seconds_since(t0);
    o.require(elapsed < tol::aux_seconds, "solve " + num(elapsed) + " s");
    return o;
}

Outcome upper_bound_chain() {
    Outcome o;
    const ModelSpec m = decreasing();
    const SolvedModel sm = solved(m);
    const Threshold& th = sm.threshold;
    const LPConfig base{};
    for (double x0 : {0.5 * th.bstar, th.bstar, 2.0 * th.bstar}) {
        const double v = value_at(m, sm.psi, th, x0).total;
        const LPRun full = run_lp(m, sm, x0, LPMode::Full, base);
        const LPRun aux = run_lp(m, sm, x0, LPMode::Aux, base);
        const bool ok = full.solution.status == LPStatus::Optimal && aux.solution.status == LPStatus::Optimal;
        const double lp = full.solution.objective;
        o.require(ok && lp >= v - tol::chain && lp <= aux.solution.objective + tol::chain,
                  "x0=" + num(x0) + ": V " + num(v) + " <= LP " + num(lp) + " <= aux " + num(aux.solution.objective));
        if (x0 > th.bstar) {
            o.require(lp <= v * (1.0 + tol::truncation), "truncation gap " + num(lp / v - 1.0));
            LPConfig fine = base;
            fine.grid.n_states *= 2;
            fine.basis_size = 2 * (base.basis_size - 4) + 4;
            const LPRun refined = run_lp(m, sm, x0, LPMode::Full, fine);
            o.require(refined.solution.status == LPStatus::Optimal && refined.solution.objective < lp,
                      "refined " + num(refined.solution.objective));
        }
    }
    return o;
}

Outcome mu1star_attainment() {
    Outcome o;
    const ModelSpec m = drifted();
    const SolvedModel sm = solved(m);
    const double x0 = 2.0;
    std::vector<Mu1StarReport> reps;
    for (std::size_t n = 256; n <= 4096; n *= 2) reps.push_back(feasibility_check_mu1star(m, sm.psi, sm.threshold, x0, n));
    double order = HUGE_VAL;
    for (std::size_t k = 0; k + 1 < reps.size(); ++k) {
        const double r0 = std::abs(reps[k].constraint_residual), r1 = std::abs(reps[k + 1].constraint_residual);
        if (r1 <= 1e-13 * psi_at(sm.psi, x0)) break;
        order = std::min(order, std::log2(r0 / r1));
    }
    const double v = value_at(m, sm.psi, sm.threshold, x0).total;
    const double obj_err = std::abs(reps.back().objective - v) / v;
    o.require(order >= tol::mu1_order, "residual order " + num(order) + ", finest residual " + num(reps.back().constraint_residual));
    o.require(obj_err <= tol::mu1_objective, "objective rel error " + num(obj_err));
    return o;
}

Outcome determinism(const std::string& data_dir) {
    Outcome o;
    const RunConfig cfg = load_config(data_dir + "/drifted_bm.json");
    const std::string a = verify_json(run_verify(cfg));
    const std::string b = verify_json(run_verify(cfg));
    o.require(a == b, "two verify reports of " + std::to_string(a.size()) + " bytes identical");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string data_dir = argc > 1 ? argv[1] : HARVEST_TEST_DATA;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"psi correctness", psi_correctness},
        {"threshold", threshold_fixture},
        {"value formula", value_formula},
        {"generator bound", generator_bound},
        {"monte carlo vs closed form", monte_carlo},
        {"strict suboptimality of jump reflection", jump_suboptimality},
        {"auxiliary LP exactness", aux_exactness},
        {"upper-bound chain", upper_bound_chain},
        {"mu1* attainment", mu1star_attainment},
        {"determinism", [&] { return determinism(data_dir); }},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("error: ") + e.what();
        }
        failures += o.pass ? 0 : 1;
        std::printf("criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
