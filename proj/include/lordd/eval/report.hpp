#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace lordd::eval {

struct RowKey {
    std::string method;
    std::string training_data;
    std::string corpus;   // parallel corpus, "" when unused
    std::string variant;  // free-form ablation label
    std::string test_dialect;

    std::string str() const;
    auto operator<=>(const RowKey&) const = default;
};

struct Scores {
    double similarity = 0.0;  // percent
    double accuracy = 0.0;    // percent
};

// Scores of one row on one backend.
struct ResultSet {
    RowKey key;
    std::string backend_id;
    Scores scores;
    std::string manifest;  // run manifest that produced the numbers, if any
};

enum class Metric { similarity, accuracy };
enum class AnnotationKind { improve, degrade };

struct PublishedAnnotation {
    RowKey key;
    AnnotationKind kind;
    Metric metric;
    double value;
};

struct Reconciliation {
    PublishedAnnotation published;
    double computed = 0.0;
    bool reconciled = false;
};

struct ReportRow {
    RowKey key;
    std::map<std::string, Scores> per_backend;
    Scores mu;
    std::optional<Scores> improve;  // vs in-dialect of the same test dialect
    std::optional<Scores> degrade;  // vs skyline, relative to this row's score
    std::vector<std::string> manifests;
};

struct EvalReport {
    std::vector<std::string> backends;
    std::vector<ReportRow> rows;
    std::vector<Reconciliation> reconciliations;
    double tolerance = 1.0;

    const ReportRow& row(const RowKey& key) const;
    std::size_t unreconciled() const;
};

struct ReportSpec {
    std::optional<RowKey> skyline;
    std::vector<RowKey> in_dialect;  // at most one per test dialect
    std::vector<PublishedAnnotation> published;
    double tolerance = 1.0;
};

// Rows keep first-appearance order; mu is the mean over the backends a row
// has. Throws ArgumentError naming any referenced key that is missing.
EvalReport build_report(std::span<const ResultSet> sets, const ReportSpec& spec);

nlohmann::json to_json(const EvalReport& report);
std::string render_table(const EvalReport& report);
void write_report(const std::filesystem::path& dir, const EvalReport& report);

// {"results": [...], "skyline": {...}, "in_dialect": [...], "published": [...]}
std::vector<ResultSet> result_sets_from_json(const nlohmann::json& j);
ReportSpec report_spec_from_json(const nlohmann::json& j);
RowKey row_key_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RowKey& key);

std::string to_string(Metric m);
std::string to_string(AnnotationKind k);

}  // namespace lordd::eval
