#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lordd/cli/config.hpp"
#include "lordd/corpus/fixture.hpp"
#include "lordd/corpus/jsonl.hpp"
#include "lordd/eval/metrics.hpp"
#include "lordd/eval/report.hpp"

namespace lordd::cli {

using Log = std::function<void(const std::string&)>;

// Layout of one run directory.
struct RunPaths {
    std::filesystem::path root;

    std::filesystem::path backend() const { return root / "backend"; }
    std::filesystem::path masked_dir() const { return root / "masked"; }
    std::filesystem::path masked(corpus::Dialect d) const;
    std::filesystem::path pairs(const corpus::CorpusSpec& spec, corpus::Split split) const;
    std::filesystem::path stage(const std::string& name) const { return root / name; }
    std::filesystem::path checkpoint(const std::string& name) const { return root / name / "checkpoint"; }
    std::filesystem::path eval() const { return root / "eval"; }
    // Path as recorded in manifests and reports: relative to the run root.
    std::string rel(const std::filesystem::path& p) const;
};

// Provenance record written next to every stage output.
struct RunManifest {
    std::string command;
    IniConfig config;
    std::vector<std::pair<std::string, std::string>> inputs;   // path, content digest
    std::vector<std::pair<std::string, std::string>> outputs;  // path, content digest
    std::vector<std::string> checkpoints;
    std::vector<std::pair<std::string, double>> timings;  // seconds

    std::string config_digest() const;
    // Files are digested directly; directories file by file in sorted order.
    void add_input(const RunPaths& paths, const std::filesystem::path& p);
    void add_output(const RunPaths& paths, const std::filesystem::path& p);
    void write(const std::filesystem::path& path) const;
};

std::string file_digest(const std::filesystem::path& p);

struct PrepareEntry {
    corpus::Dialect dialect;
    corpus::SplitCounts counts;
    std::vector<corpus::Rejected> excluded;
};

struct PrepareSummary {
    std::vector<PrepareEntry> entries;
    std::vector<std::string> expectation_errors;
};

// Masks every data file present under the data root.
PrepareSummary run_prepare(const ExperimentConfig& cfg, const RunPaths& paths, const Log& log);
std::map<corpus::Dialect, corpus::SplitCounts> read_expected_counts(const std::filesystem::path& path);
void write_expected_counts(const std::filesystem::path& path, const std::map<corpus::Dialect, corpus::SplitCounts>& counts);

struct PairsSummary {
    corpus::CorpusSpec spec;
    corpus::Split split = corpus::Split::train;
    corpus::PairCounts counts;
    std::filesystem::path file;
};

PairsSummary run_pairs(const ExperimentConfig& cfg, const RunPaths& paths, corpus::Split split, const Log& log);

struct StageSummary {
    std::filesystem::path checkpoint;
    int best_epoch = 0;
    double best_loss = 0.0;
    std::size_t examples = 0;
};

StageSummary run_dialect_stage(const ExperimentConfig& cfg, const RunPaths& paths, const Log& log);
StageSummary run_task_stage(const ExperimentConfig& cfg, const RunPaths& paths, const Log& log);

struct EvalSummary {
    eval::RowKey key;
    std::string backend_id;
    eval::Scores scores;
    std::vector<eval::EvalResult> results;
    std::string manifest;  // relative to the run root
};

EvalSummary run_eval(const ExperimentConfig& cfg, const RunPaths& paths, const Log& log);

// prepare, pairs (when a corpus is configured), dialect stage, task stage, eval.
EvalSummary run_pipeline(const ExperimentConfig& cfg, const RunPaths& paths, const Log& log);

std::vector<corpus::MaskedExample> load_split(const RunPaths& paths, corpus::Dialect d, corpus::Split split);

// Training examples for the task stage: all of the last subset plus a
// us_fraction sample of the first when two are combined.
std::vector<corpus::MaskedExample> task_training_set(const ExperimentConfig& cfg, const RunPaths& paths);

// Writes <dir>/<dialect>.jsonl for every subset plus expected_counts.json.
void write_fixture(const std::filesystem::path& dir, std::uint64_t seed);

}  // namespace lordd::cli
