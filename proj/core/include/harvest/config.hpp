#pragma once

#include "harvest/model.hpp"
#include "harvest/montecarlo.hpp"
#include "harvest/oclp.hpp"
#include "harvest/psi.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace harvest {

struct LPConfig {
    MeasureGridParams grid;
    std::size_t basis_size = 40;
    bool psi_row = true;
    /// Trapezoid interval counts for the mu1* refinement study.
    std::vector<std::size_t> mu1star_intervals{256, 512, 1024, 2048, 4096};
};

struct OutputConfig {
    std::string directory = "out";
    bool json = true;
    bool csv = true;
};

/// Everything a CLI run needs, parsed from one JSON document.
struct RunConfig {
    ModelSpec model;
    std::vector<double> x0;
    GridParams grid;
    std::optional<SimConfig> sim;
    LPConfig lp;
    std::vector<int> chatter_n{1, 2, 4, 8, 16, 32, 64};
    OutputConfig output;
};

/// {"family": ..., "params": {...}, "discount": r, "yield": {"kind": ..., "params": {...}}}
ModelSpec parse_model(std::string_view json_text);

/// Validates the whole document before anything is computed; throws Config.
RunConfig parse_config(std::string_view json_text);

RunConfig load_config(const std::string& path);

}  // namespace harvest
