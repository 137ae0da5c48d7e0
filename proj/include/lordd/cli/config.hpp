#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lordd/adapters/adapter_set.hpp"
#include "lordd/corpus/conversation.hpp"
#include "lordd/corpus/pairs.hpp"
#include "lordd/eval/report.hpp"
#include "lordd/lm/tiny_decoder.hpp"
#include "lordd/training/trainers.hpp"

namespace lordd::cli {

// [section] headers, key = value lines, '#' or ';' comment lines.
class IniConfig {
public:
    static IniConfig parse(std::istream& in, const std::string& source = "<config>");
    static IniConfig load(const std::filesystem::path& path);

    std::optional<std::string> get(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key, const std::string& value);
    // "section.key" form used by ablation overrides.
    void set_dotted(const std::string& dotted, const std::string& value);
    bool has_section(const std::string& section) const;
    const std::map<std::string, std::map<std::string, std::string>>& sections() const { return data_; }

    // Sorted, one "section.key=value" per line.
    std::string canonical() const;
    std::string dump() const;

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
};

enum class Method { skyline, in_dialect, cross_dialect, lordd, ablation };
std::string to_string(Method m);
Method parse_method(const std::string& s);

struct ExperimentConfig {
    std::filesystem::path data_root = "data";
    std::map<corpus::Dialect, std::filesystem::path> data_files;
    std::optional<std::filesystem::path> expected_counts;

    Method method = Method::lordd;
    std::vector<corpus::Dialect> training_data{corpus::Dialect::en_US, corpus::Dialect::en_IN};
    std::optional<corpus::CorpusSpec> parallel_corpus = corpus::CorpusSpec{};
    double us_fraction = 1.0;
    corpus::Dialect test_dialect = corpus::Dialect::en_IN;
    std::string variant;
    std::uint64_t seed = 13;

    lm::TinyDecoderConfig backend;
    adapters::AdapterConfig adapter;
    training::TaskTrainConfig task;
    training::DialectTrainConfig dialect;
    std::optional<std::size_t> max_negatives;
    corpus::Split pair_split = corpus::Split::train;

    corpus::Split eval_split = corpus::Split::test;
    std::vector<corpus::Dialect> eval_dialects;  // empty: the test dialect
    int max_new = 24;
    bool similarity_normalized = true;
    std::optional<std::filesystem::path> prompt_template;

    // Flag > config [data] root (relative to the config file) > LORDD_DATA_DIR > ./data.
    static ExperimentConfig from_ini(const IniConfig& ini, const std::filesystem::path& base_dir);
    static ExperimentConfig defaults();

    // Propagates the experiment seed to every seeded component.
    void set_seed(std::uint64_t s);
    void validate() const;

    bool uses_dialect_adapter() const { return parallel_corpus.has_value(); }
    std::filesystem::path data_file(corpus::Dialect d) const;
    std::vector<corpus::Dialect> evaluated_dialects() const;
    std::string training_data_string() const;
    eval::RowKey row_key() const;

    // Every field, defaults included.
    IniConfig resolved() const;
};

// LORDD_DATA_DIR when set, else ./data.
std::filesystem::path default_data_root();

std::vector<corpus::Dialect> parse_dialect_list(const std::string& s, char sep);

}  // namespace lordd::cli
