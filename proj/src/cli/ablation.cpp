#include "lordd/cli/ablation.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "lordd/error.hpp"
#include "lordd/text.hpp"

namespace lordd::cli {

namespace fs = std::filesystem;

namespace {

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) {
        const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '=' || c == '-';
        out += keep ? c : '_';
    }
    return out;
}

void write_status(const fs::path& dir, const CellOutcome& o) {
    nlohmann::ordered_json j;
    j["label"] = o.cell.label;
    j["status"] = o.ok ? "ok" : "failed";
    if (o.ok) {
        j["key"] = eval::to_json(o.summary->key);
        j["backend"] = o.summary->backend_id;
        j["similarity"] = o.summary->scores.similarity;
        j["accuracy"] = o.summary->scores.accuracy;
    } else {
        j["error"] = o.error;
    }
    std::ofstream(dir / "cell_status.json", std::ios::trunc) << j.dump(2) << '\n';
}

void read_status(CellOutcome& o) {
    std::ifstream in(o.dir / "cell_status.json");
    if (!in) {
        o.ok = false;
        o.error = "cell produced no status (crashed?)";
        return;
    }
    const auto j = nlohmann::json::parse(in);
    o.ok = j.at("status") == "ok";
    if (!o.ok) {
        o.error = j.value("error", "unknown failure");
        return;
    }
    EvalSummary s;
    s.key = eval::row_key_from_json(j.at("key"));
    s.backend_id = j.at("backend").get<std::string>();
    s.scores = {j.at("similarity").get<double>(), j.at("accuracy").get<double>()};
    s.manifest = "eval/run_manifest.json";
    o.summary = std::move(s);
}

void run_cell(const Grid& grid, CellOutcome& o, const AblationOptions& opts) {
    fs::create_directories(o.dir);
    std::ofstream logf(o.dir / "log.txt", std::ios::trunc);
    try {
        const ExperimentConfig cfg = cell_config(grid, o.cell, opts);
        o.summary = run_pipeline(cfg, RunPaths{o.dir}, [&](const std::string& s) { logf << s << '\n'; });
        o.ok = true;
    } catch (const std::exception& e) {
        o.ok = false;
        o.error = e.what();
        logf << "error: " << e.what() << '\n';
    }
    write_status(o.dir, o);
}

}  // namespace

Grid load_grid(const fs::path& path, const std::optional<fs::path>& fallback_base) {
    const IniConfig ini = IniConfig::load(path);
    Grid g;
    fs::path base_path;
    if (auto b = ini.get("grid", "base")) {
        base_path = fs::path(*b).is_absolute() ? fs::path(*b) : path.parent_path() / *b;
    } else if (fallback_base) {
        base_path = *fallback_base;
    }
    if (!base_path.empty()) {
        g.base = IniConfig::load(base_path);
        g.base_dir = base_path.parent_path();
    }

    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    for (const auto& [section, kv] : ini.sections()) {
        if (section == "grid") {
            for (const auto& [k, v] : kv) {
                if (k == "base") continue;
                if (k.rfind("axis.", 0) != 0) throw ConfigError(path.string() + ": unknown grid key " + k);
                std::vector<std::string> values;
                for (const auto& x : text::split(v, ',')) {
                    if (!text::trim(x).empty()) values.push_back(text::trim(x));
                }
                if (values.empty()) throw ConfigError(path.string() + ": axis " + k + " has no values");
                axes.emplace_back(k.substr(5), values);
            }
        } else if (section.rfind("cell ", 0) == 0) {
            GridCell c{text::trim(section.substr(5)), {}};
            for (const auto& [k, v] : kv) c.overrides.emplace_back(k, v);
            g.cells.push_back(std::move(c));
        } else {
            throw ConfigError(path.string() + ": unknown grid section [" + section + "]");
        }
    }

    if (!axes.empty()) {
        std::vector<GridCell> product{GridCell{}};
        for (const auto& [axis, values] : axes) {
            std::vector<GridCell> next;
            for (const auto& partial : product) {
                for (const auto& v : values) {
                    GridCell c = partial;
                    const auto dot = axis.rfind('.');
                    const std::string name = dot == std::string::npos ? axis : axis.substr(dot + 1);
                    c.label += (c.label.empty() ? "" : ",") + name + "=" + v;
                    c.overrides.emplace_back(axis, v);
                    next.push_back(std::move(c));
                }
            }
            product = std::move(next);
        }
        g.cells.insert(g.cells.begin(), product.begin(), product.end());
    }
    if (g.cells.empty()) throw ConfigError(path.string() + ": grid defines no cells");
    return g;
}

ExperimentConfig cell_config(const Grid& grid, const GridCell& cell, const AblationOptions& opts) {
    IniConfig ini = grid.base;
    for (const auto& [k, v] : cell.overrides) {
        if (k == "dialect_adapter") {
            if (v == "without") {
                ini.set("experiment", "method", "ablation");
                ini.set("experiment", "parallel_corpus", "none");
            } else if (v == "with") {
                const auto corpus = ini.get("experiment", "parallel_corpus");
                if (!corpus || *corpus == "none") throw ConfigError("dialect_adapter=with needs experiment.parallel_corpus");
            } else {
                throw ConfigError("dialect_adapter must be 'with' or 'without', got '" + v + "'");
            }
        } else {
            ini.set_dotted(k, v);
        }
    }
    ini.set("experiment", "variant", cell.label);
    ExperimentConfig cfg = ExperimentConfig::from_ini(ini, grid.base_dir);
    if (opts.seed) cfg.set_seed(*opts.seed);
    if (opts.data_root) cfg.data_root = *opts.data_root;
    cfg.validate();
    return cfg;
}

std::vector<CellOutcome> run_ablation(const Grid& grid, const AblationOptions& opts, const Log& log) {
    std::vector<CellOutcome> outcomes;
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        char prefix[16];
        std::snprintf(prefix, sizeof prefix, "%02zu-", i);
        outcomes.push_back({grid.cells[i], opts.out / "cells" / (prefix + slug(grid.cells[i].label)), false, {}, {}});
    }

    if (opts.jobs <= 1) {
        for (auto& o : outcomes) {
            if (log) log("cell " + o.cell.label + " ...");
            run_cell(grid, o, opts);
        }
    } else {
        // One process per cell, at most opts.jobs at a time; results come back through cell_status.json.
        std::map<pid_t, std::size_t> running;
        std::size_t next = 0;
        auto reap = [&] {
            int status = 0;
            const pid_t pid = ::wait(&status);
            if (pid > 0) running.erase(pid);
        };
        while (next < outcomes.size() || !running.empty()) {
            if (next < outcomes.size() && running.size() < static_cast<std::size_t>(opts.jobs)) {
                fs::create_directories(outcomes[next].dir);
                fs::remove(outcomes[next].dir / "cell_status.json");
                std::fflush(nullptr);
                const pid_t pid = ::fork();
                if (pid < 0) throw IoError("fork failed");
                if (pid == 0) {
                    run_cell(grid, outcomes[next], opts);
                    std::_Exit(0);
                }
                if (log) log("cell " + outcomes[next].cell.label + " started");
                running[pid] = next++;
            } else {
                reap();
            }
        }
        for (auto& o : outcomes) read_status(o);
    }

    std::vector<eval::ResultSet> sets;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& o : outcomes) {
        const std::string rel = o.dir.lexically_relative(opts.out).generic_string();
        nlohmann::ordered_json c;
        c["label"] = o.cell.label;
        c["dir"] = rel;
        c["status"] = o.ok ? "ok" : "failed";
        if (o.ok) {
            sets.push_back({o.summary->key, o.summary->backend_id, o.summary->scores, rel + "/" + o.summary->manifest});
            c["similarity"] = o.summary->scores.similarity;
            c["accuracy"] = o.summary->scores.accuracy;
        } else {
            c["error"] = o.error;
        }
        cells.push_back(c);
        if (log) log("cell " + o.cell.label + ": " + (o.ok ? "ok" : "FAILED: " + o.error));
    }
    nlohmann::ordered_json summary;
    summary["cells"] = cells;
    fs::create_directories(opts.out);
    std::ofstream(opts.out / "ablation.json", std::ios::trunc) << summary.dump(2) << '\n';
    if (!sets.empty()) eval::write_report(opts.out, eval::build_report(sets, {}));
    return outcomes;
}

}  // namespace lordd::cli
