#include "lordd/cli/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lordd/adapters/checkpoint.hpp"
#include "lordd/corpus/augment.hpp"
#include "lordd/corpus/masking.hpp"
#include "lordd/corpus/prompt.hpp"
#include "lordd/error.hpp"
#include "lordd/eval/predict.hpp"
#include "lordd/lm/tiny_decoder.hpp"
#include "lordd/text.hpp"

namespace lordd::cli {

namespace fs = std::filesystem;
using corpus::Dialect;
using corpus::Split;
using Model = lm::TinyDecoder<float>;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kDialectInitOffset = 1;
constexpr std::uint64_t kTaskInitOffset = 2;

std::string dname(Dialect d) { return std::string(corpus::to_string(d)); }

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void say(const Log& log, const std::string& s) {
    if (log) log(s);
}

corpus::PromptTemplate prompt_for(const ExperimentConfig& cfg) {
    return cfg.prompt_template ? corpus::PromptTemplate::from_file(*cfg.prompt_template)
                               : corpus::PromptTemplate::default_template();
}

bool same_shape(const lm::TinyDecoderConfig& a, const lm::TinyDecoderConfig& b) {
    return a.layers == b.layers && a.hidden_dim == b.hidden_dim && a.heads == b.heads &&
           a.vocab_size == b.vocab_size && a.context_len == b.context_len && a.seed == b.seed;
}

// The base model is built once per run directory and shared by every stage.
Model open_backend(const ExperimentConfig& cfg, const RunPaths& paths, bool create) {
    if (fs::exists(paths.backend() / "manifest.txt")) {
        Model m = Model::load(paths.backend());
        if (!same_shape(m.config(), cfg.backend)) {
            throw ConfigError("backend in " + paths.backend().string() +
                              " was built with a different [backend] configuration or seed");
        }
        return m;
    }
    if (!create) throw ConfigError("no backend in " + paths.backend().string() + "; run `lordd train` first");
    Model m(cfg.backend);
    m.save(paths.backend());
    return m;
}

adapters::AdapterCheckpoint require_checkpoint(const RunPaths& paths, const std::string& stage, const std::string& hint) {
    const fs::path dir = paths.checkpoint(stage);
    if (!fs::exists(dir / "manifest.txt")) {
        throw ConfigError("missing " + stage + " checkpoint at " + dir.string() + "; " + hint);
    }
    return adapters::load_checkpoint(dir);
}

std::vector<corpus::MaskedExample> load_all(const RunPaths& paths, Dialect d) {
    const fs::path p = paths.masked(d);
    if (!fs::exists(p)) throw ConfigError("no masked data for " + dname(d) + " at " + p.string() + "; run `lordd prepare` first");
    return corpus::load_masked(p);
}

void append(std::vector<corpus::MaskedExample>& dst, std::vector<corpus::MaskedExample> src) {
    dst.insert(dst.end(), std::make_move_iterator(src.begin()), std::make_move_iterator(src.end()));
}

void write_json(const fs::path& p, const nlohmann::ordered_json& j) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out << j.dump(2) << '\n';
}

}  // namespace

fs::path RunPaths::masked(Dialect d) const { return masked_dir() / (dname(d) + ".jsonl"); }

fs::path RunPaths::pairs(const corpus::CorpusSpec& spec, Split split) const {
    return root / "pairs" /
           (dname(spec.frozen_side) + "_" + dname(spec.focus_side) + "." + std::string(corpus::to_string(split)) + ".jsonl");
}

std::string RunPaths::rel(const fs::path& p) const {
    const fs::path r = p.lexically_relative(root);
    return r.empty() || *r.begin() == ".." ? p.string() : r.generic_string();
}

std::string file_digest(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return text::git_blob_digest(ss.str());
}

std::string RunManifest::config_digest() const { return text::git_blob_digest(config.canonical()); }

namespace {

void add_entries(const RunPaths& paths, const fs::path& p, std::vector<std::pair<std::string, std::string>>& out) {
    if (fs::is_directory(p)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::recursive_directory_iterator(p)) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) out.emplace_back(paths.rel(f), file_digest(f));
    } else {
        out.emplace_back(paths.rel(p), file_digest(p));
    }
}

}  // namespace

void RunManifest::add_input(const RunPaths& paths, const fs::path& p) { add_entries(paths, p, inputs); }
void RunManifest::add_output(const RunPaths& paths, const fs::path& p) { add_entries(paths, p, outputs); }

void RunManifest::write(const fs::path& path) const {
    nlohmann::ordered_json j;
    j["format"] = "lordd-run-manifest/1";
    j["command"] = command;
    j["config_digest"] = config_digest();
    nlohmann::ordered_json c;
    for (const auto& [s, kv] : config.sections()) {
        for (const auto& [k, v] : kv) c[s + "." + k] = v;
    }
    j["config"] = c;
    auto listing = [](const auto& entries) {
        nlohmann::ordered_json a = nlohmann::ordered_json::array();
        for (const auto& [p, d] : entries) a.push_back({{"path", p}, {"digest", d}});
        return a;
    };
    j["inputs"] = listing(inputs);
    j["outputs"] = listing(outputs);
    j["checkpoints"] = checkpoints;
    nlohmann::ordered_json t;
    for (const auto& [k, v] : timings) t[k] = v;
    j["timings"] = t;
    j["written_at"] = utc_now();
    write_json(path, j);
}

std::map<Dialect, corpus::SplitCounts> read_expected_counts(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read expectation file " + path.string());
    std::map<Dialect, corpus::SplitCounts> out;
    try {
        const auto j = nlohmann::json::parse(in);
        for (const auto& [d, c] : j.items()) {
            out[corpus::parse_dialect(d)] = {c.at("train").get<std::size_t>(), c.at("valid").get<std::size_t>(),
                                             c.at("test").get<std::size_t>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("expectation file " + path.string() + ": " + e.what());
    }
    return out;
}

void write_expected_counts(const fs::path& path, const std::map<Dialect, corpus::SplitCounts>& counts) {
    nlohmann::ordered_json j;
    for (Dialect d : corpus::kAllDialects) {
        const auto it = counts.find(d);
        if (it == counts.end()) continue;
        j[dname(d)] = {{"train", it->second.train}, {"valid", it->second.valid}, {"test", it->second.test}};
    }
    write_json(path, j);
}

PrepareSummary run_prepare(const ExperimentConfig& cfg, const RunPaths& paths, const Log& log) {
    const auto t0 = Clock::now();
    RunManifest man{"prepare", cfg.resolved(), {}, {}, {}, {}};
    PrepareSummary summary;
    for (Dialect d : corpus::kAllDialects) {
        const fs::path src = cfg.data_file(d);
        if (!fs::exists(src)) continue;
        man.add_input(paths, src);
        corpus::LoadReport rep = corpus::load_conversations_lenient(src);
        PrepareEntry entry{d, {}, rep.unmaskable};
        std::vector<corpus::MaskedExample> masked;
        for (const auto& conv : rep.conversations) {
            if (conv.dialect != d) {
                throw ValidationError(src.string() + ": record " + conv.id + " has dialect " + dname(conv.dialect));
            }
            try {
                masked.push_back(corpus::mask_conversation(conv));
            } catch (const MaskingError& e) {
                entry.excluded.push_back({0, conv.id, e.what()});
                continue;
            }
            switch (conv.split) {
                case Split::train: ++entry.counts.train; break;
                case Split::valid: ++entry.counts.valid; break;
                case Split::test: ++entry.counts.test; break;
            }
        }
        for (const auto& r : entry.excluded) {
            say(log, "warning: " + dname(d) + ": excluded " + r.id + " (" + r.reason + ")");
        }
        corpus::write_masked(paths.masked(d), masked);
        man.add_output(paths, paths.masked(d));
        summary.entries.push_back(std::move(entry));
    }
    if (summary.entries.empty()) {
        throw ConfigError("no conversation files (<dialect>.jsonl) found under " + cfg.data_root.string());
    }
    if (cfg.expected_counts) {
        man.add_input(paths, *cfg.expected_counts);
        const auto expected = read_expected_counts(*cfg.expected_counts);
        for (const auto& e : summary.entries) {
            const auto it = expected.find(e.dialect);
            if (it == expected.end()) continue;
            const auto& x = it->second;
            if (x.train != e.counts.train || x.valid != e.counts.valid || x.test != e.counts.test) {
                summary.expectation_errors.push_back(
                    dname(e.dialect) + ": expected " + std::to_string(x.train) + "/" + std::to_string(x.valid) + "/" +
                    std::to_string(x.test) + ", got " + std::to_string(e.counts.train) + "/" +
                    std::to_string(e.counts.valid) + "/" + std::to_string(e.counts.test));
            }
        }
    }
    man.timings.emplace_back("wall_seconds", since(t0));
    man.write(paths.masked_dir() / "run_manifest.json");
    return summary;
}

std::vector<corpus::MaskedExample> load_split(const RunPaths& paths, Dialect d, Split split) {
    std::vector<corpus::MaskedExample> out;
    for (auto& ex : load_all(paths, d)) {
        if (ex.split == split) out.push_back(std::move(ex));
    }
    return out;
}

PairsSummary run_pairs(const ExperimentConfig& cfg, const RunPaths& paths, Split split, const Log& log) {
    if (!cfg.parallel_corpus) throw ConfigError("no parallel corpus configured (experiment.parallel_corpus)");
    const auto t0 = Clock::now();
    const corpus::CorpusSpec spec = *cfg.parallel_corpus;
    const auto a = load_split(paths, spec.frozen_side, split);
    const auto b = load_split(paths, spec.focus_side, split);
    const std::size_t cap = cfg.max_negatives.value_or(corpus::default_max_negatives(spec));
    const auto pairs = corpus::build_parallel_pairs(a, b, cap, cfg.seed);
    PairsSummary s{spec, split, corpus::count_pairs(pairs), paths.pairs(spec, split)};
    if (s.counts.positives == 0) say(log, "warning: " + spec.to_string() + " has no same-target pairs in " + std::string(corpus::to_string(split)));
    corpus::write_pairs(s.file, pairs);

    RunManifest man{"pairs", cfg.resolved(), {}, {}, {}, {}};
    man.add_input(paths, paths.masked(spec.frozen_side));
    man.add_input(paths, paths.masked(spec.focus_side));
    man.add_output(paths, s.file);
    man.timings.emplace_back("wall_seconds", since(t0));
    man.write(fs::path(s.file).replace_extension(".manifest.json"));
    return s;
}

StageSummary run_dialect_stage(const ExperimentConfig& cfg, const RunPaths& paths, const Log& log) {
    if (!cfg.uses_dialect_adapter()) {
        throw ConfigError("method " + to_string(cfg.method) + " has no parallel corpus, so there is no dialect stage");
    }
    const auto t0 = Clock::now();
    const corpus::CorpusSpec spec = *cfg.parallel_corpus;
    Model model = open_backend(cfg, paths, true);

    auto pairs_for = [&](Split split) {
        const fs::path f = paths.pairs(spec, split);
        if (!fs::exists(f)) run_pairs(cfg, paths, split, log);
        return corpus::load_pairs(f);
    };
    const auto train_pairs = pairs_for(cfg.pair_split);
    std::vector<corpus::ContrastivePair> valid_pairs;
    if (cfg.pair_split == Split::train && !load_split(paths, spec.frozen_side, Split::valid).empty() &&
        !load_split(paths, spec.focus_side, Split::valid).empty()) {
        valid_pairs = pairs_for(Split::valid);
    }
    std::vector<corpus::MaskedExample> examples = load_all(paths, spec.frozen_side);
    append(examples, load_all(paths, spec.focus_side));

    auto set = adapters::inject(model.linear_layers(), cfg.adapter, adapters::AdapterRole::dialect,
                                cfg.seed + kDialectInitOffset);
    adapters::set_trainable(set, true);
    say(log, "dialect stage: " + std::to_string(train_pairs.size()) + " train pairs, " +
                 std::to_string(valid_pairs.size()) + " valid pairs, " + std::to_string(set.parameter_count()) +
                 " adapter parameters");
    auto outcome = training::train_dialect(model, set, train_pairs, valid_pairs, examples, prompt_for(cfg),
                                           cfg.dialect, [&](const training::EpochMetrics& m) {
                                               say(log, "  epoch " + std::to_string(m.epoch) + " " + m.split +
                                                            " loss " + std::to_string(m.loss));
                                           });
    outcome.best.metadata["corpus"] = spec.to_string();
    outcome.best.metadata["run_manifest"] = "dialect/run_manifest.json";

    const fs::path dir = paths.stage("dialect");
    adapters::save_checkpoint(paths.checkpoint("dialect"), outcome.best);
    training::write_metrics(dir / "metrics.jsonl", outcome.metrics);

    RunManifest man{"train --stage dialect", cfg.resolved(), {}, {}, {}, {}};
    man.add_input(paths, paths.backend());
    man.add_input(paths, paths.pairs(spec, cfg.pair_split));
    if (!valid_pairs.empty()) man.add_input(paths, paths.pairs(spec, Split::valid));
    man.add_output(paths, paths.checkpoint("dialect"));
    man.checkpoints.push_back(paths.rel(paths.checkpoint("dialect")));
    man.timings.emplace_back("wall_seconds", since(t0));
    man.write(dir / "run_manifest.json");

    StageSummary s{paths.checkpoint("dialect"), outcome.best_epoch, 0.0, train_pairs.size()};
    for (const auto& m : outcome.metrics) {
        if (m.epoch == outcome.best_epoch && m.split == (valid_pairs.empty() ? "train" : "valid")) s.best_loss = m.loss;
    }
    return s;
}

std::vector<corpus::MaskedExample> task_training_set(const ExperimentConfig& cfg, const RunPaths& paths) {
    if (cfg.training_data.size() == 1) return load_split(paths, cfg.training_data[0], Split::train);
    const auto pool = load_split(paths, cfg.training_data[0], Split::train);
    const auto base = load_split(paths, cfg.training_data[1], Split::train);
    return corpus::augment(pool, base, cfg.us_fraction, cfg.seed);
}

StageSummary run_task_stage(const ExperimentConfig& cfg, const RunPaths& paths, const Log& log) {
    const auto t0 = Clock::now();
    Model model = open_backend(cfg, paths, true);
    std::optional<adapters::AdapterSet<float>> dialect;
    if (cfg.uses_dialect_adapter()) {
        const auto ck = require_checkpoint(paths, "dialect", "run `lordd train --stage dialect` first");
        dialect = adapters::attach(model.linear_layers(), model.descriptor(), ck);
    }
    const auto train = task_training_set(cfg, paths);
    std::vector<corpus::MaskedExample> valid;
    for (Dialect d : cfg.training_data) append(valid, load_split(paths, d, Split::valid));
    if (train.empty()) throw ConfigError("no training examples for " + cfg.training_data_string());

    auto task = adapters::inject(model.linear_layers(), cfg.adapter, adapters::AdapterRole::task,
                                 cfg.seed + kTaskInitOffset);
    adapters::set_trainable(task, true);
    auto st = dialect ? adapters::stack(*dialect, task) : adapters::stack(task);
    say(log, "task stage: " + std::to_string(train.size()) + " train / " + std::to_string(valid.size()) +
                 " valid examples, stack " + st.order_string());
    auto outcome = training::train_task(model, st, train, valid, prompt_for(cfg), cfg.task,
                                        [&](const training::EpochMetrics& m) {
                                            say(log, "  epoch " + std::to_string(m.epoch) + " " + m.split + " loss " +
                                                         std::to_string(m.loss));
                                        });
    outcome.best.metadata["method"] = to_string(cfg.method);
    outcome.best.metadata["training_data"] = cfg.training_data_string();
    outcome.best.metadata["run_manifest"] = "task/run_manifest.json";

    const fs::path dir = paths.stage("task");
    adapters::save_checkpoint(paths.checkpoint("task"), outcome.best);
    training::write_metrics(dir / "metrics.jsonl", outcome.metrics);

    RunManifest man{"train --stage task", cfg.resolved(), {}, {}, {}, {}};
    man.add_input(paths, paths.backend());
    for (Dialect d : cfg.training_data) man.add_input(paths, paths.masked(d));
    if (dialect) man.add_input(paths, paths.checkpoint("dialect"));
    man.add_output(paths, paths.checkpoint("task"));
    man.checkpoints.push_back(paths.rel(paths.checkpoint("task")));
    man.timings.emplace_back("wall_seconds", since(t0));
    man.write(dir / "run_manifest.json");

    StageSummary s{paths.checkpoint("task"), outcome.best_epoch, 0.0, train.size()};
    for (const auto& m : outcome.metrics) {
        if (m.epoch == outcome.best_epoch && m.split == (valid.empty() ? "train" : "valid")) s.best_loss = m.loss;
    }
    return s;
}

EvalSummary run_eval(const ExperimentConfig& cfg, const RunPaths& paths, const Log& log) {
    const auto t0 = Clock::now();
    Model model = open_backend(cfg, paths, false);
    const auto task_ck = require_checkpoint(paths, "task", "run `lordd train --stage task` first");
    std::optional<adapters::AdapterSet<float>> dialect;
    if (cfg.uses_dialect_adapter()) {
        dialect = adapters::attach(model.linear_layers(), model.descriptor(),
                                   require_checkpoint(paths, "dialect", "run `lordd train --stage dialect` first"));
    }
    adapters::attach(model.linear_layers(), model.descriptor(), task_ck);

    std::vector<corpus::MaskedExample> examples;
    for (Dialect d : cfg.evaluated_dialects()) append(examples, load_split(paths, d, cfg.eval_split));
    if (examples.empty()) throw ConfigError("nothing to evaluate in the " + std::string(corpus::to_string(cfg.eval_split)) + " split");

    const eval::TrigramEmbedder embedder;
    eval::EvalOptions opts;
    opts.max_new = cfg.max_new;
    opts.similarity.normalized = cfg.similarity_normalized;
    EvalSummary s;
    s.results = eval::evaluate<float>(model, examples, prompt_for(cfg), embedder, opts);
    s.key = cfg.row_key();
    s.backend_id = model.descriptor().backend_id;
    s.scores = {100.0 * [&] {
                    double acc = 0.0;
                    for (const auto& r : s.results) acc += r.similarity;
                    return acc / static_cast<double>(s.results.size());
                }(),
                eval::accuracy(s.results)};
    s.manifest = "eval/run_manifest.json";

    const fs::path dir = paths.eval();
    eval::write_predictions(dir / "predictions.jsonl", s.results);
    nlohmann::ordered_json scores;
    scores["results"] = nlohmann::ordered_json::array();
    nlohmann::ordered_json row;
    row["key"] = eval::to_json(s.key);
    row["backend"] = s.backend_id;
    row["similarity"] = s.scores.similarity;
    row["accuracy"] = s.scores.accuracy;
    row["count"] = s.results.size();
    row["manifest"] = s.manifest;
    scores["results"].push_back(row);
    write_json(dir / "scores.json", scores);
    const eval::ResultSet rs{s.key, s.backend_id, s.scores, s.manifest};
    eval::write_report(dir, eval::build_report(std::span(&rs, 1), {}));

    std::size_t flagged = 0;
    for (const auto& r : s.results) flagged += r.flags.empty() ? 0 : 1;
    say(log, "eval: " + std::to_string(s.results.size()) + " examples, " + std::to_string(flagged) + " flagged");

    RunManifest man{"eval", cfg.resolved(), {}, {}, {}, {}};
    man.add_input(paths, paths.backend());
    if (dialect) man.add_input(paths, paths.checkpoint("dialect"));
    man.add_input(paths, paths.checkpoint("task"));
    for (Dialect d : cfg.evaluated_dialects()) man.add_input(paths, paths.masked(d));
    for (const char* f : {"predictions.jsonl", "scores.json", "report.json", "report.txt"}) man.add_output(paths, dir / f);
    man.timings.emplace_back("wall_seconds", since(t0));
    man.write(dir / "run_manifest.json");
    return s;
}

EvalSummary run_pipeline(const ExperimentConfig& cfg, const RunPaths& paths, const Log& log) {
    const auto prep = run_prepare(cfg, paths, log);
    if (!prep.expectation_errors.empty()) throw ValidationError("split counts differ: " + prep.expectation_errors.front());
    if (cfg.uses_dialect_adapter()) {
        run_pairs(cfg, paths, cfg.pair_split, log);
        run_dialect_stage(cfg, paths, log);
    }
    run_task_stage(cfg, paths, log);
    return run_eval(cfg, paths, log);
}

void write_fixture(const fs::path& dir, std::uint64_t seed) {
    const auto convs = corpus::generate_fixture(seed);
    std::map<Dialect, corpus::SplitCounts> counts;
    for (Dialect d : corpus::kAllDialects) {
        std::vector<corpus::Conversation> subset;
        for (const auto& c : convs) {
            if (c.dialect == d) subset.push_back(c);
        }
        corpus::write_conversations(dir / (dname(d) + ".jsonl"), subset);
        counts[d] = corpus::fixture_split_counts(d);
    }
    write_expected_counts(dir / "expected_counts.json", counts);
}

}  // namespace lordd::cli
