#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lordd/cli/ablation.hpp"
#include "lordd/cli/commands.hpp"
#include "lordd/cli/config.hpp"
#include "lordd/corpus/jsonl.hpp"
#include "lordd/error.hpp"
#include "test_support.hpp"

using namespace lordd;
using namespace lordd::cli;
using namespace lordd::testing;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

// Small and fast: one block, a handful of epochs.
std::string quick_config(const fs::path& data, const std::string& experiment) {
    return "[data]\nroot = " + data.string() + "\n\n[experiment]\n" + experiment +
           "\nseed = 7\n\n[backend]\nlayers = 1\nhidden_dim = 16\nheads = 2\ncontext_len = 256\n\n"
           "[adapter]\nrank = 2\nalpha = 4\n\n[dialect]\nepochs = 2\nbatch_size = 4\nlearning_rate = 0.001\n\n"
           "[task]\nepochs = 2\nbatch_size = 4\nlearning_rate = 0.01\n\n[eval]\nsplit = train\nmax_new = 4\n";
}

const std::string kLordd =
    "method = lordd\ntraining_data = en-US + en-IN\nparallel_corpus = en-US || en-IN\ntest_dialect = en-IN";
const std::string kInDialect = "method = in_dialect\ntraining_data = en-IN\ntest_dialect = en-IN";

fs::path tiny_data() { return source_dir() / "data/tiny"; }

}  // namespace

TEST(Ini, ParsesSectionsAndComments) {
    std::istringstream in("# top\n[a]\nx = 1\n; note\ny=two words \n\n[b]\nz = 3\n");
    const auto ini = IniConfig::parse(in);
    EXPECT_EQ(ini.get("a", "x"), "1");
    EXPECT_EQ(ini.get("a", "y"), "two words");
    EXPECT_EQ(ini.get("b", "z"), "3");
    EXPECT_FALSE(ini.get("b", "x"));
    EXPECT_EQ(ini.canonical(), "a.x=1\na.y=two words\nb.z=3\n");
}

TEST(Ini, Errors) {
    auto parse = [](const std::string& s) {
        std::istringstream in(s);
        return IniConfig::parse(in);
    };
    EXPECT_THROW(parse("x = 1\n"), ConfigError);
    EXPECT_THROW(parse("[a]\nx = 1\nx = 2\n"), ConfigError);
    EXPECT_THROW(parse("[a\n"), ConfigError);
    EXPECT_THROW(parse("[a]\njunk\n"), ConfigError);
    IniConfig ini;
    EXPECT_THROW(ini.set_dotted("nodot", "1"), ConfigError);
}

TEST(Config, FromIniAndInvariants) {
    auto load = [](const std::string& s) {
        std::istringstream in(s);
        return ExperimentConfig::from_ini(IniConfig::parse(in), "/base");
    };
    const auto cfg = load("[experiment]\n" + kLordd + "\nus_fraction = 0.5\n[data]\nroot = d\n");
    EXPECT_EQ(cfg.method, Method::lordd);
    EXPECT_EQ(cfg.us_fraction, 0.5);
    EXPECT_EQ(cfg.data_root, fs::path("/base/d"));
    EXPECT_EQ(cfg.parallel_corpus->focus_side, corpus::Dialect::en_IN);
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.row_key().method, "lordd");

    EXPECT_THROW(load("[experiment]\nmethod = lordd\nparallel_corpus = none\n").validate(), ConfigError);
    EXPECT_THROW(load("[experiment]\nmethod = skyline\ntraining_data = en-US\nparallel_corpus = en-US || en-IN\n").validate(),
                 ConfigError);
    EXPECT_THROW(load("[experiment]\n" + kLordd + "\nus_fraction = 1.5\n").validate(), ConfigError);
    EXPECT_THROW(load("[experiment]\nmethod = magic\n"), ConfigError);
    EXPECT_THROW(load("[experiment]\ncolour = blue\n"), ConfigError);
    EXPECT_THROW(load("[nonsense]\nx = 1\n"), ConfigError);
    EXPECT_THROW(load("[adapter]\nrank = many\n"), ConfigError);

    auto seeded = cfg;
    seeded.set_seed(99);
    EXPECT_EQ(seeded.task.seed, 99u);
    EXPECT_EQ(seeded.dialect.seed, 99u);
    EXPECT_EQ(seeded.backend.seed, 99u);
}

TEST(Cli, UsageAndHelp) {
    EXPECT_EQ(run({"--help"}).code, kExitOk);
    EXPECT_EQ(run({}).code, kExitError);
    EXPECT_EQ(run({"frobnicate"}).code, kExitError);
    EXPECT_EQ(run({"train"}).code, kExitError);
    EXPECT_EQ(run({"train", "--stage", "both"}).code, kExitError);
    EXPECT_EQ(run({"--jobs", "0", "prepare"}).code, kExitError);
}

TEST(Cli, ConfigViolationsExitTwo) {
    TempDir dir;
    spit(dir / "bad.ini", "[experiment]\nmethod = lordd\nparallel_corpus = none\n");
    const auto r = run({"--config", (dir / "bad.ini").string(), "--out", (dir / "run").string(), "prepare"});
    EXPECT_EQ(r.code, kExitError);
    EXPECT_TRUE(contains(r.err, "corpus"));
    EXPECT_EQ(run({"--config", (dir / "missing.ini").string(), "prepare"}).code, kExitError);
}

TEST(Cli, PrepareEmptyDataRootFails) {
    TempDir dir;
    fs::create_directories(dir / "empty");
    const auto r = run({"--data", (dir / "empty").string(), "--out", (dir / "run").string(), "prepare"});
    EXPECT_EQ(r.code, kExitError);
}

TEST(Cli, PrepareExcludesUnmaskableWithWarning) {
    TempDir dir;
    fs::create_directories(dir / "data");
    std::vector<corpus::Conversation> convs{
        conversation("en-IN-ok", corpus::Dialect::en_IN, "Kite", {describer("It flies on a string"), guesser("Kite")}),
        conversation("en-IN-leak", corpus::Dialect::en_IN, "Kite", {describer("Say kite"), guesser("Kite")}),
        conversation("en-IN-never", corpus::Dialect::en_IN, "Kite", {describer("It flies"), guesser("Bird")}),
    };
    corpus::write_conversations(dir / "data/en-IN.jsonl", convs);
    const auto r = run({"--data", (dir / "data").string(), "--out", (dir / "run").string(), "prepare"});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(contains(r.err, "en-IN-leak"));
    EXPECT_TRUE(contains(r.err, "en-IN-never"));
    const auto kept = corpus::load_masked(dir / "run/masked/en-IN.jsonl");
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept[0].source_id, "en-IN-ok");
    EXPECT_TRUE(fs::exists(dir / "run/masked/run_manifest.json"));
}

TEST(Cli, PrepareChecksExpectedCounts) {
    TempDir dir;
    spit(dir / "expect.json", R"({"en-US": {"train": 5, "valid": 0, "test": 0}})");
    const auto r = run({"--data", tiny_data().string(), "--out", (dir / "run").string(), "prepare", "--expect",
                        (dir / "expect.json").string()});
    EXPECT_EQ(r.code, kExitError);
    EXPECT_TRUE(contains(r.err, "count mismatch"));
}

TEST(Cli, PairsWithZeroNegatives) {
    TempDir dir;
    spit(dir / "c.ini", quick_config(tiny_data(), kLordd));
    const std::string out = (dir / "run").string();
    ASSERT_EQ(run({"--config", (dir / "c.ini").string(), "--out", out, "prepare"}).code, kExitOk);
    const auto r = run({"--config", (dir / "c.ini").string(), "--out", out, "pairs", "--max-negatives", "0"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(contains(r.out, "en-US || en-IN\t4\t4\t0"));
    const auto pairs = corpus::load_pairs(dir / "run/pairs/en-US_en-IN.train.jsonl");
    EXPECT_EQ(pairs.size(), 4u);
    for (const auto& p : pairs) EXPECT_EQ(p.label, 1);
}

TEST(Cli, TaskStageNeedsDialectCheckpoint) {
    TempDir dir;
    spit(dir / "c.ini", quick_config(tiny_data(), kLordd));
    const std::string out = (dir / "run").string();
    ASSERT_EQ(run({"--config", (dir / "c.ini").string(), "--out", out, "prepare"}).code, kExitOk);
    const auto r = run({"--config", (dir / "c.ini").string(), "--out", out, "train", "--stage", "task"});
    EXPECT_EQ(r.code, kExitError);
    EXPECT_TRUE(contains(r.err, "train --stage dialect"));
}

TEST(Cli, EvalWithoutCheckpointFails) {
    TempDir dir;
    spit(dir / "c.ini", quick_config(tiny_data(), kInDialect));
    const std::string out = (dir / "run").string();
    ASSERT_EQ(run({"--config", (dir / "c.ini").string(), "--out", out, "prepare"}).code, kExitOk);
    EXPECT_EQ(run({"--config", (dir / "c.ini").string(), "--out", out, "eval"}).code, kExitError);
}

TEST(Cli, InDialectRunsTaskStageOnly) {
    TempDir dir;
    spit(dir / "c.ini", quick_config(tiny_data(), kInDialect));
    const std::vector<std::string> base{"--config", (dir / "c.ini").string(), "--out", (dir / "run").string()};
    auto with = [&](std::vector<std::string> more) {
        auto a = base;
        a.insert(a.end(), more.begin(), more.end());
        return run(a);
    };
    ASSERT_EQ(with({"prepare"}).code, kExitOk);
    const auto t = with({"train", "--stage", "task"});
    ASSERT_EQ(t.code, kExitOk) << t.err;
    const auto e = with({"eval"});
    ASSERT_EQ(e.code, kExitOk) << e.err;
    EXPECT_FALSE(fs::exists(dir / "run/dialect"));
    EXPECT_TRUE(fs::exists(dir / "run/task/checkpoint"));
    EXPECT_TRUE(fs::exists(dir / "run/eval/predictions.jsonl"));
    EXPECT_TRUE(fs::exists(dir / "run/eval/report.txt"));
    const auto manifest = nlohmann::json::parse(slurp(dir / "run/task/run_manifest.json"));
    EXPECT_EQ(manifest.at("format"), "lordd-run-manifest/1");
    // The dialect stage is refused for a method without a corpus.
    EXPECT_EQ(with({"train", "--stage", "dialect"}).code, kExitError);
}

TEST(Cli, AblationGridAllCells) {
    TempDir dir;
    spit(dir / "base.ini", quick_config(tiny_data(), kLordd));
    spit(dir / "grid.ini",
         "[grid]\nbase = base.ini\naxis.experiment.us_fraction = 0, 0.25, 0.5, 0.75, 1\n"
         "axis.dialect_adapter = with, without\n");
    const auto g = load_grid(dir / "grid.ini", std::nullopt);
    ASSERT_EQ(g.cells.size(), 10u);
    // Axes vary in key order, the last fastest: dialect_adapter is the outer one.
    EXPECT_EQ(cell_config(g, g.cells[0], {}).method, Method::lordd);
    EXPECT_TRUE(cell_config(g, g.cells[0], {}).parallel_corpus);
    EXPECT_EQ(cell_config(g, g.cells[5], {}).method, Method::ablation);
    EXPECT_FALSE(cell_config(g, g.cells[5], {}).parallel_corpus);
    EXPECT_EQ(cell_config(g, g.cells[1], {}).us_fraction, 0.25);

    const auto r = run({"--out", (dir / "run").string(), "--jobs", "2", "ablate", "--grid", (dir / "grid.ini").string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const auto rep = nlohmann::json::parse(slurp(dir / "run/report.json"));
    EXPECT_EQ(rep.at("rows").size(), 10u);
    EXPECT_TRUE(contains(r.out, "10 of 10 cells completed"));
}

TEST(Cli, AblationBadCellIsPartial) {
    TempDir dir;
    spit(dir / "base.ini", quick_config(tiny_data(), kLordd));
    spit(dir / "grid.ini",
         "[grid]\nbase = base.ini\n\n[cell good]\nexperiment.us_fraction = 0.5\n\n"
         "[cell contradictory]\nexperiment.method = skyline\n");
    const auto r = run({"--out", (dir / "run").string(), "ablate", "--grid", (dir / "grid.ini").string()});
    EXPECT_EQ(r.code, kExitPartial) << r.err;
    EXPECT_TRUE(contains(r.out, "1 of 2 cells completed"));
    const auto ab = nlohmann::json::parse(slurp(dir / "run/ablation.json"));
    EXPECT_TRUE(contains(ab.dump(), "contradictory"));
}

TEST(Cli, ReportAcrossBackendsHasMuColumn) {
    TempDir dir;
    const std::string k = R"({"method":"lordd","training_data":"en-US + en-IN","test_dialect":"en-IN"})";
    spit(dir / "a.json", R"({"results":[{"key":)" + k + R"(,"backend":"alpha","similarity":50,"accuracy":20}]})");
    spit(dir / "b.json", R"({"results":[{"key":)" + k + R"(,"backend":"beta","similarity":60,"accuracy":40}]})");
    const auto r = run({"--out", (dir / "rep").string(), "report", "--input", (dir / "a.json").string(), "--input",
                        (dir / "b.json").string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(contains(r.out, "alpha"));
    EXPECT_TRUE(contains(r.out, "beta"));
    EXPECT_TRUE(contains(r.out, "mu"));
    const auto rep = nlohmann::json::parse(slurp(dir / "rep/report.json"));
    EXPECT_DOUBLE_EQ(rep.at("rows")[0].at("mu").at("similarity").get<double>(), 55.0);
    EXPECT_DOUBLE_EQ(rep.at("rows")[0].at("mu").at("accuracy").get<double>(), 30.0);
}

TEST(Cli, ReportFlagsPublishedTable) {
    TempDir dir;
    const auto r = run({"--out", (dir / "rep").string(), "report", "--input", (source_dir() / "tests/data/published_baselines.json").string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(contains(r.out, "2 published annotation(s) UNRECONCILED"));
}
