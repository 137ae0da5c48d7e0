#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lordd/cli/config.hpp"
#include "lordd/cli/pipeline.hpp"

namespace lordd::cli {

// One grid cell: overrides applied on top of the base config.
struct GridCell {
    std::string label;
    std::vector<std::pair<std::string, std::string>> overrides;  // "section.key", value
};

struct Grid {
    IniConfig base;
    std::filesystem::path base_dir;
    std::vector<GridCell> cells;
};

// [grid] base = <config>; axis.<section>.<key> = v1, v2, ...; the special
// axis.dialect_adapter = with, without toggles the dialect stage. Axes vary
// in key order, the last one fastest. [cell <name>] sections add explicit
// cells whose keys are section.key overrides.
Grid load_grid(const std::filesystem::path& path, const std::optional<std::filesystem::path>& fallback_base);

struct CellOutcome {
    GridCell cell;
    std::filesystem::path dir;
    bool ok = false;
    std::string error;
    std::optional<EvalSummary> summary;
};

struct AblationOptions {
    std::filesystem::path out;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> data_root;
};

// Runs every cell end to end in cells/<nn>-<label>/ and writes the combined
// report.json / report.txt / ablation.json under opts.out. A failing cell is
// recorded and the rest still run.
std::vector<CellOutcome> run_ablation(const Grid& grid, const AblationOptions& opts, const Log& log);

// Config of one cell after overrides, seed and data root are applied.
ExperimentConfig cell_config(const Grid& grid, const GridCell& cell, const AblationOptions& opts);

}  // namespace lordd::cli
