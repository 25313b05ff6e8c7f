#pragma once

#include "harvest/montecarlo.hpp"
#include "harvest/oclp.hpp"
#include "harvest/pipeline.hpp"
#include "harvest/psi.hpp"
#include "harvest/threshold.hpp"
#include "harvest/value.hpp"

#include <string>
#include <vector>

namespace harvest {

/// %.17g; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double v);

/// Comma-joined fields plus '\n'.
std::string csv_line(const std::vector<std::string>& fields);

// JSON documents (two-space indent, fixed key order, trailing newline).
std::string classify_json(const ModelSpec& m, BoundaryClass bc, const FellerSweep& sweep);
std::string threshold_json(const ModelSpec& m, const Threshold& th);
std::string sim_json(const PolicySpec& policy, double x0, const SimResult& r);
std::string lp_json(const LPRun& run);
std::string lp_summary_json(const ModelSpec& m, const Threshold& th, const std::vector<LPRun>& runs);
std::string mu1star_json(const std::vector<Mu1StarReport>& rows);
std::string verify_json(const VerifyReport& report);

// CSV tables with header rows.
std::string psi_csv(const ModelSpec& m, const FundamentalSolution& fs, const std::vector<double>& xs);
std::string value_csv(const std::vector<ValueBreakdown>& rows);
std::string path_payoffs_csv(const SimResult& r);
std::string active_rows_csv(const LPRun& run);
std::string chatter_csv(const ChatterTable& table);

}  // namespace harvest
