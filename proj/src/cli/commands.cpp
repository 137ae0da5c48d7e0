#include "lordd/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "lordd/cli/ablation.hpp"
#include "lordd/cli/config.hpp"
#include "lordd/cli/pipeline.hpp"
#include "lordd/error.hpp"

namespace lordd::cli {

namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config;
    std::string out = "run";
    std::optional<std::uint64_t> seed;
    int jobs = 1;
    std::string data;
};

ExperimentConfig load_config(const Globals& g) {
    ExperimentConfig cfg;
    if (!g.config.empty()) {
        cfg = ExperimentConfig::from_ini(IniConfig::load(g.config), fs::path(g.config).parent_path());
    } else {
        cfg = ExperimentConfig::defaults();
    }
    if (!g.data.empty()) cfg.data_root = g.data;
    if (g.seed) cfg.set_seed(*g.seed);
    cfg.validate();
    return cfg;
}

std::string fixed(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dual low-rank adapter dialect adaptation toolkit", "lordd"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Experiment config (INI)");
    app.add_option("--out", g.out, "Run directory")->capture_default_str();
    app.add_option("--seed", g.seed, "Seed for every seeded component (default 13)");
    app.add_option("--jobs", g.jobs, "Parallel ablation cells")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--data", g.data, "Data root (default: LORDD_DATA_DIR, then ./data)");

    auto* prepare = app.add_subcommand("prepare", "Mask every conversation file under the data root");
    std::string expect;
    prepare->add_option("--expect", expect, "JSON of expected per-split counts");

    auto* pairs = app.add_subcommand("pairs", "Build the pseudo-parallel corpus");
    std::string corpus_spec, pair_split = "train";
    std::optional<std::size_t> max_negatives;
    pairs->add_option("--corpus", corpus_spec, "e.g. \"en-US || en-IN\" (default: experiment.parallel_corpus)");
    pairs->add_option("--split", pair_split, "Split to pair")->capture_default_str();
    pairs->add_option("--max-negatives", max_negatives, "Negative sample cap");

    auto* train = app.add_subcommand("train", "Train the dialect or task adapter");
    std::string stage;
    train->add_option("--stage", stage, "task or dialect")->required()->check(CLI::IsMember({"task", "dialect"}));

    auto* evaluate = app.add_subcommand("eval", "Predict targets and score them");
    std::string eval_split, eval_dialects;
    evaluate->add_option("--split", eval_split, "Split to evaluate (default: eval.split)");
    evaluate->add_option("--dialects", eval_dialects, "Comma-separated subsets (default: eval.dialects)");

    auto* ablate = app.add_subcommand("ablate", "Run an ablation grid end to end");
    std::string grid_path;
    ablate->add_option("--grid", grid_path, "Grid file")->required();

    auto* report = app.add_subcommand("report", "Build a report from result sets");
    std::vector<std::string> inputs;
    std::optional<double> tolerance;
    report->add_option("--input", inputs, "Result/spec JSON files")->required();
    report->add_option("--tolerance", tolerance, "Reconciliation tolerance in points");

    auto* fixture = app.add_subcommand("fixture", "Write the synthetic fixture corpus to --out");

    for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) sub->fallthrough();

    std::vector<std::string> argv_store{"lordd"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "lordd: " << e.what() << "\n";
        return kExitError;
    }

    const Log log = [&](const std::string& s) { err << s << "\n"; };
    const RunPaths paths{g.out};
    try {
        if (fixture->parsed()) {
            write_fixture(g.out, g.seed.value_or(13));
            out << "fixture written to " << g.out << "\n";
            return kExitOk;
        }
        if (report->parsed()) {
            std::vector<eval::ResultSet> sets;
            eval::ReportSpec spec;
            for (const auto& in : inputs) {
                std::ifstream f(in);
                if (!f) throw ConfigError("cannot read " + in);
                nlohmann::json j;
                try {
                    j = nlohmann::json::parse(f);
                } catch (const nlohmann::json::exception& e) {
                    throw ParseError(in + ": " + e.what());
                }
                if (j.contains("results")) {
                    auto more = eval::result_sets_from_json(j);
                    sets.insert(sets.end(), more.begin(), more.end());
                }
                const auto part = eval::report_spec_from_json(j);
                if (part.skyline) spec.skyline = part.skyline;
                spec.in_dialect.insert(spec.in_dialect.end(), part.in_dialect.begin(), part.in_dialect.end());
                spec.published.insert(spec.published.end(), part.published.begin(), part.published.end());
                if (j.contains("tolerance")) spec.tolerance = part.tolerance;
            }
            if (tolerance) spec.tolerance = *tolerance;
            if (sets.empty()) throw ConfigError("no result sets in the inputs");
            const auto rep = eval::build_report(sets, spec);
            eval::write_report(g.out, rep);
            out << eval::render_table(rep);
            if (rep.unreconciled()) out << rep.unreconciled() << " published annotation(s) UNRECONCILED\n";
            return kExitOk;
        }
        if (ablate->parsed()) {
            std::optional<fs::path> base;
            if (!g.config.empty()) base = g.config;
            const Grid grid = load_grid(grid_path, base);
            AblationOptions opts{g.out, g.jobs, g.seed, std::nullopt};
            if (!g.data.empty()) opts.data_root = fs::path(g.data);
            const auto outcomes = run_ablation(grid, opts, log);
            std::size_t failed = 0;
            for (const auto& o : outcomes) failed += o.ok ? 0 : 1;
            if (fs::exists(fs::path(g.out) / "report.txt")) {
                std::ifstream f(fs::path(g.out) / "report.txt");
                out << f.rdbuf();
            }
            out << outcomes.size() - failed << " of " << outcomes.size() << " cells completed\n";
            return failed ? kExitPartial : kExitOk;
        }

        ExperimentConfig cfg = load_config(g);
        if (prepare->parsed()) {
            if (!expect.empty()) cfg.expected_counts = expect;
            const auto s = run_prepare(cfg, paths, log);
            out << std::left << std::setw(8) << "subset" << std::right << std::setw(7) << "train" << std::setw(7)
                << "valid" << std::setw(7) << "test" << std::setw(10) << "excluded" << "\n";
            for (const auto& e : s.entries) {
                out << std::left << std::setw(8) << corpus::to_string(e.dialect) << std::right << std::setw(7)
                    << e.counts.train << std::setw(7) << e.counts.valid << std::setw(7) << e.counts.test
                    << std::setw(10) << e.excluded.size() << "\n";
            }
            if (!s.expectation_errors.empty()) {
                for (const auto& m : s.expectation_errors) err << "count mismatch: " << m << "\n";
                return kExitError;
            }
            return kExitOk;
        }
        if (pairs->parsed()) {
            if (!corpus_spec.empty()) cfg.parallel_corpus = corpus::parse_corpus_spec(corpus_spec);
            if (max_negatives) cfg.max_negatives = *max_negatives;
            const auto s = run_pairs(cfg, paths, corpus::parse_split(pair_split), log);
            out << "corpus\tsamples\tpositive\tnegative\n";
            out << s.spec.to_string() << "\t" << s.counts.samples << "\t" << s.counts.positives << "\t"
                << s.counts.negatives << "\n";
            return kExitOk;
        }
        if (train->parsed()) {
            const auto s = stage == "dialect" ? run_dialect_stage(cfg, paths, log) : run_task_stage(cfg, paths, log);
            out << stage << " checkpoint " << s.checkpoint.string() << " (best epoch " << s.best_epoch << ", loss "
                << fixed(s.best_loss, 6) << ")\n";
            return kExitOk;
        }
        if (evaluate->parsed()) {
            if (!eval_split.empty()) cfg.eval_split = corpus::parse_split(eval_split);
            if (!eval_dialects.empty()) cfg.eval_dialects = parse_dialect_list(eval_dialects, ',');
            const auto s = run_eval(cfg, paths, log);
            out << s.key.str() << " on " << s.backend_id << ": similarity " << fixed(s.scores.similarity, 1)
                << " accuracy " << fixed(s.scores.accuracy, 1) << " (" << s.results.size() << " examples)\n";
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "lordd: " << e.what() << "\n";
        return kExitError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "lordd: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

}  // namespace lordd::cli
