#include "lordd/cli/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "lordd/error.hpp"
#include "lordd/text.hpp"

namespace lordd::cli {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s{
        {"data", {"root", "expect", "en-US", "en-IN", "en-NG", "IN-MV", "NG-MV", "IN-TR"}},
        {"experiment", {"method", "training_data", "parallel_corpus", "us_fraction", "test_dialect", "seed", "variant"}},
        {"backend", {"kind", "layers", "hidden_dim", "heads", "context_len"}},
        {"adapter", {"rank", "alpha", "init_std", "target_layers"}},
        {"task", {"epochs", "batch_size", "learning_rate", "optimizer", "weight_decay"}},
        {"dialect", {"epochs", "batch_size", "learning_rate", "margin", "weight_decay", "max_negatives", "pair_split"}},
        {"eval", {"split", "dialects", "max_new", "similarity"}},
        {"prompt", {"template"}},
    };
    return s;
}

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

long long to_int(const std::string& where, const std::string& v) {
    std::size_t pos = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size()) throw ConfigError(where + ": expected an integer, got '" + v + "'");
    return out;
}

double to_real(const std::string& where, const std::string& v) {
    std::size_t pos = 0;
    double out = 0;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size()) throw ConfigError(where + ": expected a number, got '" + v + "'");
    return out;
}

corpus::Dialect to_dialect(const std::string& where, const std::string& v) {
    try {
        return corpus::parse_dialect(text::trim(v));
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

corpus::Split to_split(const std::string& where, const std::string& v) {
    try {
        return corpus::parse_split(text::trim(v));
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

IniConfig IniConfig::parse(std::istream& in, const std::string& source) {
    IniConfig cfg;
    std::string line, section;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string t = text::trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        const std::string where = source + ":" + std::to_string(n);
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = text::trim(t.substr(1, t.size() - 2));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            cfg.data_[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        if (section.empty()) throw ConfigError(where + ": key outside of a section");
        const std::string key = text::trim(t.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (cfg.data_[section].count(key)) throw ConfigError(where + ": duplicate key " + section + "." + key);
        cfg.data_[section][key] = text::trim(t.substr(eq + 1));
    }
    return cfg;
}

IniConfig IniConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    return parse(in, path.string());
}

std::optional<std::string> IniConfig::get(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    if (s == data_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
}

void IniConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    data_[section][key] = value;
}

void IniConfig::set_dotted(const std::string& dotted, const std::string& value) {
    const auto dot = dotted.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == dotted.size()) {
        throw ConfigError("override '" + dotted + "' is not of the form section.key");
    }
    set(dotted.substr(0, dot), dotted.substr(dot + 1), value);
}

bool IniConfig::has_section(const std::string& section) const { return data_.count(section) > 0; }

std::string IniConfig::canonical() const {
    std::string out;
    for (const auto& [s, kv] : data_) {
        for (const auto& [k, v] : kv) out += s + "." + k + "=" + v + "\n";
    }
    return out;
}

std::string IniConfig::dump() const {
    std::string out;
    for (const auto& [s, kv] : data_) {
        if (!out.empty()) out += "\n";
        out += "[" + s + "]\n";
        for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    }
    return out;
}

std::string to_string(Method m) {
    switch (m) {
        case Method::skyline: return "skyline";
        case Method::in_dialect: return "in_dialect";
        case Method::cross_dialect: return "cross_dialect";
        case Method::lordd: return "lordd";
        case Method::ablation: return "ablation";
    }
    return "?";
}

Method parse_method(const std::string& s) {
    for (Method m : {Method::skyline, Method::in_dialect, Method::cross_dialect, Method::lordd, Method::ablation}) {
        if (to_string(m) == s) return m;
    }
    throw ConfigError("unknown method '" + s + "' (skyline, in_dialect, cross_dialect, lordd, ablation)");
}

std::filesystem::path default_data_root() {
    if (const char* env = std::getenv("LORDD_DATA_DIR"); env && *env) return env;
    return "data";
}

std::vector<corpus::Dialect> parse_dialect_list(const std::string& s, char sep) {
    std::vector<corpus::Dialect> out;
    for (const auto& part : text::split(s, sep)) {
        if (text::trim(part).empty()) continue;
        out.push_back(to_dialect("dialect list", part));
    }
    return out;
}

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    c.data_root = default_data_root();
    c.set_seed(c.seed);
    return c;
}

void ExperimentConfig::set_seed(std::uint64_t s) {
    seed = s;
    backend.seed = s;
    task.seed = s;
    dialect.seed = s;
}

ExperimentConfig ExperimentConfig::from_ini(const IniConfig& ini, const std::filesystem::path& base_dir) {
    for (const auto& [section, kv] : ini.sections()) {
        const auto known = schema().find(section);
        if (known == schema().end()) throw ConfigError("unknown config section [" + section + "]");
        for (const auto& [k, v] : kv) {
            if (!known->second.count(k)) throw ConfigError("unknown config key " + section + "." + k);
        }
    }
    ExperimentConfig c = defaults();
    auto val = [&](const char* s, const char* k) { return ini.get(s, k); };
    auto where = [](const char* s, const char* k) { return std::string(s) + "." + k; };

    if (auto v = val("data", "root")) c.data_root = resolve(base_dir, *v);
    if (auto v = val("data", "expect")) c.expected_counts = resolve(base_dir, *v);
    for (corpus::Dialect d : corpus::kAllDialects) {
        if (auto v = ini.get("data", std::string(corpus::to_string(d)))) c.data_files[d] = resolve(base_dir, *v);
    }

    if (auto v = val("experiment", "method")) c.method = parse_method(*v);
    if (auto v = val("experiment", "training_data")) c.training_data = parse_dialect_list(*v, '+');
    if (auto v = val("experiment", "parallel_corpus")) {
        if (*v == "none" || v->empty()) {
            c.parallel_corpus.reset();
        } else {
            c.parallel_corpus = corpus::parse_corpus_spec(*v);
        }
    } else {
        c.parallel_corpus.reset();
    }
    if (auto v = val("experiment", "us_fraction")) c.us_fraction = to_real(where("experiment", "us_fraction"), *v);
    if (auto v = val("experiment", "test_dialect")) {
        c.test_dialect = to_dialect(where("experiment", "test_dialect"), *v);
    } else if (!c.training_data.empty()) {
        c.test_dialect = c.training_data.back();
    }
    if (auto v = val("experiment", "variant")) c.variant = *v;
    if (auto v = val("experiment", "seed")) {
        const long long s = to_int(where("experiment", "seed"), *v);
        if (s < 0) throw ConfigError("experiment.seed must be non-negative");
        c.set_seed(static_cast<std::uint64_t>(s));
    }

    if (auto v = val("backend", "kind"); v && *v != "tiny") {
        throw ConfigError("backend.kind: only the built-in 'tiny' decoder is available, got '" + *v + "'");
    }
    if (auto v = val("backend", "layers")) c.backend.layers = static_cast<int>(to_int(where("backend", "layers"), *v));
    if (auto v = val("backend", "hidden_dim")) c.backend.hidden_dim = static_cast<int>(to_int(where("backend", "hidden_dim"), *v));
    if (auto v = val("backend", "heads")) c.backend.heads = static_cast<int>(to_int(where("backend", "heads"), *v));
    if (auto v = val("backend", "context_len")) c.backend.context_len = static_cast<int>(to_int(where("backend", "context_len"), *v));

    if (auto v = val("adapter", "rank")) c.adapter.rank = static_cast<int>(to_int(where("adapter", "rank"), *v));
    if (auto v = val("adapter", "alpha")) c.adapter.alpha = to_real(where("adapter", "alpha"), *v);
    if (auto v = val("adapter", "init_std")) c.adapter.init_std = to_real(where("adapter", "init_std"), *v);
    if (auto v = val("adapter", "target_layers")) {
        c.adapter.target_layers.clear();
        for (const auto& l : text::split(*v, ',')) {
            if (!text::trim(l).empty()) c.adapter.target_layers.push_back(text::trim(l));
        }
    }

    if (auto v = val("task", "epochs")) c.task.epochs = static_cast<int>(to_int(where("task", "epochs"), *v));
    if (auto v = val("task", "batch_size")) c.task.batch_size = static_cast<int>(to_int(where("task", "batch_size"), *v));
    if (auto v = val("task", "learning_rate")) c.task.learning_rate = to_real(where("task", "learning_rate"), *v);
    if (auto v = val("task", "optimizer")) c.task.optimizer_id = *v;
    if (auto v = val("task", "weight_decay")) c.task.weight_decay = to_real(where("task", "weight_decay"), *v);

    if (auto v = val("dialect", "epochs")) c.dialect.epochs = static_cast<int>(to_int(where("dialect", "epochs"), *v));
    if (auto v = val("dialect", "batch_size")) c.dialect.batch_size = static_cast<int>(to_int(where("dialect", "batch_size"), *v));
    if (auto v = val("dialect", "learning_rate")) c.dialect.learning_rate = to_real(where("dialect", "learning_rate"), *v);
    if (auto v = val("dialect", "margin")) c.dialect.margin = to_real(where("dialect", "margin"), *v);
    if (auto v = val("dialect", "weight_decay")) c.dialect.weight_decay = to_real(where("dialect", "weight_decay"), *v);
    if (auto v = val("dialect", "max_negatives")) {
        const long long n = to_int(where("dialect", "max_negatives"), *v);
        if (n < 0) throw ConfigError("dialect.max_negatives must be non-negative");
        c.max_negatives = static_cast<std::size_t>(n);
    }
    if (auto v = val("dialect", "pair_split")) c.pair_split = to_split(where("dialect", "pair_split"), *v);

    if (auto v = val("eval", "split")) c.eval_split = to_split(where("eval", "split"), *v);
    if (auto v = val("eval", "dialects")) c.eval_dialects = parse_dialect_list(*v, ',');
    if (auto v = val("eval", "max_new")) c.max_new = static_cast<int>(to_int(where("eval", "max_new"), *v));
    if (auto v = val("eval", "similarity")) {
        if (*v != "normalized" && *v != "raw") throw ConfigError("eval.similarity must be 'normalized' or 'raw'");
        c.similarity_normalized = *v == "normalized";
    }
    if (auto v = val("prompt", "template")) c.prompt_template = resolve(base_dir, *v);
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    if (training_data.empty()) throw ConfigError("experiment.training_data is empty");
    if (training_data.size() > 2) throw ConfigError("experiment.training_data combines at most two subsets");
    if (!(us_fraction >= 0.0 && us_fraction <= 1.0)) throw ConfigError("experiment.us_fraction must lie in [0, 1]");
    switch (method) {
        case Method::lordd:
            if (!parallel_corpus) throw ConfigError("method lordd requires experiment.parallel_corpus");
            break;
        case Method::skyline:
        case Method::in_dialect:
        case Method::cross_dialect:
            if (parallel_corpus) {
                throw ConfigError("method " + to_string(method) + " does not take a parallel corpus (got '" +
                                  parallel_corpus->to_string() + "')");
            }
            break;
        case Method::ablation:
            break;
    }
    if (max_new < 1) throw ConfigError("eval.max_new must be >= 1");
    backend.validate();
    adapter.validate();
    task.validate();
    dialect.validate();
}

std::filesystem::path ExperimentConfig::data_file(corpus::Dialect d) const {
    if (auto it = data_files.find(d); it != data_files.end()) return it->second;
    return data_root / (std::string(corpus::to_string(d)) + ".jsonl");
}

std::vector<corpus::Dialect> ExperimentConfig::evaluated_dialects() const {
    return eval_dialects.empty() ? std::vector<corpus::Dialect>{test_dialect} : eval_dialects;
}

std::string ExperimentConfig::training_data_string() const {
    std::string s;
    for (auto d : training_data) s += (s.empty() ? "" : " + ") + std::string(corpus::to_string(d));
    return s;
}

eval::RowKey ExperimentConfig::row_key() const {
    eval::RowKey k;
    k.method = to_string(method);
    k.training_data = training_data_string();
    k.corpus = parallel_corpus ? parallel_corpus->to_string() : "";
    k.variant = variant;
    for (auto d : evaluated_dialects()) k.test_dialect += (k.test_dialect.empty() ? "" : "+") + std::string(corpus::to_string(d));
    if (eval_split != corpus::Split::test) k.test_dialect += " (" + std::string(corpus::to_string(eval_split)) + ")";
    return k;
}

IniConfig ExperimentConfig::resolved() const {
    IniConfig i;
    i.set("data", "root", data_root.string());
    for (const auto& [d, p] : data_files) i.set("data", std::string(corpus::to_string(d)), p.string());
    if (expected_counts) i.set("data", "expect", expected_counts->string());
    i.set("experiment", "method", to_string(method));
    i.set("experiment", "training_data", training_data_string());
    i.set("experiment", "parallel_corpus", parallel_corpus ? parallel_corpus->to_string() : "none");
    i.set("experiment", "us_fraction", exact(us_fraction));
    i.set("experiment", "test_dialect", std::string(corpus::to_string(test_dialect)));
    i.set("experiment", "seed", std::to_string(seed));
    if (!variant.empty()) i.set("experiment", "variant", variant);
    i.set("backend", "kind", "tiny");
    i.set("backend", "layers", std::to_string(backend.layers));
    i.set("backend", "hidden_dim", std::to_string(backend.hidden_dim));
    i.set("backend", "heads", std::to_string(backend.heads));
    i.set("backend", "context_len", std::to_string(backend.context_len));
    i.set("adapter", "rank", std::to_string(adapter.rank));
    i.set("adapter", "alpha", exact(adapter.alpha));
    i.set("adapter", "init_std", exact(adapter.init_std));
    std::string layers;
    for (const auto& l : adapter.target_layers) layers += (layers.empty() ? "" : ",") + l;
    i.set("adapter", "target_layers", layers);
    i.set("task", "epochs", std::to_string(task.epochs));
    i.set("task", "batch_size", std::to_string(task.batch_size));
    i.set("task", "learning_rate", exact(task.learning_rate));
    i.set("task", "optimizer", task.optimizer_id);
    i.set("task", "weight_decay", exact(task.weight_decay));
    i.set("dialect", "epochs", std::to_string(dialect.epochs));
    i.set("dialect", "batch_size", std::to_string(dialect.batch_size));
    i.set("dialect", "learning_rate", exact(dialect.learning_rate));
    i.set("dialect", "margin", exact(dialect.margin));
    i.set("dialect", "weight_decay", exact(dialect.weight_decay));
    if (max_negatives) i.set("dialect", "max_negatives", std::to_string(*max_negatives));
    i.set("dialect", "pair_split", std::string(corpus::to_string(pair_split)));
    i.set("eval", "split", std::string(corpus::to_string(eval_split)));
    std::string ds;
    for (auto d : evaluated_dialects()) ds += (ds.empty() ? "" : ",") + std::string(corpus::to_string(d));
    i.set("eval", "dialects", ds);
    i.set("eval", "max_new", std::to_string(max_new));
    i.set("eval", "similarity", similarity_normalized ? "normalized" : "raw");
    if (prompt_template) i.set("prompt", "template", prompt_template->string());
    return i;
}

}  // namespace lordd::cli
