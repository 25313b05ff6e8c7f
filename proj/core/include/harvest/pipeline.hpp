#pragma once

#include "harvest/config.hpp"
#include "harvest/oclp.hpp"
#include "harvest/psi.hpp"
#include "harvest/simplex.hpp"
#include "harvest/threshold.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace harvest {

/// Boundary class, psi and b* for one model.
struct SolvedModel {
    BoundaryClass boundary;
    FundamentalSolution psi;
    Threshold threshold;
};

SolvedModel solve_model(const ModelSpec& m, const GridParams& grid);

enum class LPMode { Full, Aux };

struct LPRun {
    LPMode mode = LPMode::Full;
    double x0 = 0.0;
    LPInstance instance;
    LPSolution solution;
    std::vector<SupportAtom> support;
    std::size_t n_states = 0;
};

/// Builds the measure grid (x0 and b* as exact nodes) and solves one LP.
LPRun run_lp(const ModelSpec& m, const SolvedModel& sm, double x0, LPMode mode, const LPConfig& cfg);

struct CheckEntry {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
};

struct VerifyReport {
    std::vector<CheckEntry> entries;
    bool overall() const noexcept;
};

/// Runs every check that applies to the configured model. Checks that need
/// b* > 0 are skipped when b* = 0; Monte Carlo checks need a sim block.
VerifyReport run_verify(const RunConfig& cfg);

/// Writes value_sweep.csv, lp_summary.json and, with a sim block,
/// mc_vs_closed_form.csv and chatter.csv into dir.
void run_report(const RunConfig& cfg, const std::filesystem::path& dir);

}  // namespace harvest
