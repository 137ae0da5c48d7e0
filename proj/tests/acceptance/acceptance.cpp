// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lordd/adapters/adapter_set.hpp"
#include "lordd/adapters/checkpoint.hpp"
#include "lordd/cli/commands.hpp"
#include "lordd/corpus/jsonl.hpp"
#include "lordd/corpus/masking.hpp"
#include "lordd/corpus/pairs.hpp"
#include "lordd/eval/report.hpp"
#include "lordd/rng.hpp"
#include "lordd/text.hpp"
#include "lordd/training/gradcheck.hpp"
#include "lordd/training/losses.hpp"
#include "lordd/training/trainers.hpp"
#include "test_support.hpp"

using namespace lordd;
using namespace lordd::testing;
using adapters::AdapterRole;
namespace fs = std::filesystem;

namespace {

// Collects the first few failure notes of one criterion.
struct Check {
    std::vector<std::string> notes;
    void expect(bool ok, const std::string& what) {
        if (!ok && notes.size() < 4) notes.push_back(what);
        failed = failed || !ok;
    }
    bool failed = false;
};

std::string num(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

lm::TinyDecoderConfig small(int hidden, int context = 64) {
    lm::TinyDecoderConfig c;
    c.layers = 2;
    c.hidden_dim = hidden;
    c.heads = 2;
    c.context_len = context;
    return c;
}

lm::TokenSequence random_tokens(Rng& rng, std::size_t n) {
    lm::TokenSequence t(n);
    for (auto& x : t) x = static_cast<lm::TokenId>(rng.below(lm::CharTokenizer::kMask));
    return t;
}

template <typename Scalar>
void randomize_b(adapters::AdapterSet<Scalar>& set, double scale, std::uint64_t seed) {
    Rng rng(seed);
    for (auto* a : set.entries()) {
        for (Eigen::Index i = 0; i < a->B.size(); ++i) a->B.data()[i] = static_cast<Scalar>(scale * rng.normal());
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1
void identity_at_init(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(1);
    lm::TinyDecoder<float> mf(small(32));
    lm::TinyDecoder<double> md(small(32));
    std::vector<lm::TokenSequence> inputs;
    for (int i = 0; i < 8; ++i) inputs.push_back(random_tokens(rng, 1 + rng.below(64)));
    std::vector<MatrixF> bf;
    std::vector<MatrixD> bd;
    for (const auto& t : inputs) {
        bf.push_back(mf.forward(t).logits);
        bd.push_back(md.forward(t).logits);
    }
    adapters::AdapterConfig cfg{8, 16.0, 0.02, {}};
    adapters::inject(mf.linear_layers(), cfg, AdapterRole::dialect, 2);
    adapters::inject(mf.linear_layers(), cfg, AdapterRole::task, 3);
    adapters::inject(md.linear_layers(), cfg, AdapterRole::dialect, 2);
    adapters::inject(md.linear_layers(), cfg, AdapterRole::task, 3);
    double worst = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const MatrixF af = mf.forward(inputs[i]).logits;
        const MatrixD ad = md.forward(inputs[i]).logits;
        worst = std::max<double>(worst, (af - bf[i]).cwiseAbs().maxCoeff());
        worst = std::max(worst, (ad - bd[i]).cwiseAbs().maxCoeff());
        c.expect(af == bf[i] && ad == bd[i], "logits not bitwise equal on input " + std::to_string(i));
    }
    c.expect(worst < 1e-6, "max abs diff " + num(worst));
    c.expect(seconds_since(t0) < 5.0, "took " + num(seconds_since(t0)) + " s");
}

// 2
void task_loss_oracle(Check& c) {
    Rng rng(21);
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int vocab = 2 + static_cast<int>(rng.below(15));
        const std::size_t nx = 1 + rng.below(12), nt = 1 + rng.below(3);
        lm::TokenSequence toks(nx + nt);
        for (auto& t : toks) t = static_cast<lm::TokenId>(rng.below(static_cast<std::uint64_t>(vocab)));
        MatrixD logits(static_cast<Eigen::Index>(toks.size() - 1), vocab);
        for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = 2.0 * rng.normal();
        const training::TrainBatch batch{{toks}, {{nx + 1, nx + nt}}};
        const double got = training::task_loss<double>(std::vector<MatrixD>{logits}, batch);
        worst = std::max(worst, std::abs(got - oracle_target_nll(logits, toks, nx + 1, nx + nt)));
    }
    c.expect(worst < 1e-6, "oracle gap " + num(worst));
    for (int vocab : {4, 16}) {
        for (std::size_t nt : {1u, 3u}) {
            lm::TokenSequence toks(5 + nt, 1);
            const MatrixD uniform = MatrixD::Zero(static_cast<Eigen::Index>(toks.size() - 1), vocab);
            const training::TrainBatch batch{{toks}, {{6, 5 + nt}}};
            const double got = training::task_loss<double>(std::vector<MatrixD>{uniform}, batch);
            c.expect(std::abs(got - static_cast<double>(nt) * std::log(vocab)) < 1e-6, "uniform case " + num(got));
        }
    }
}

// 3
void dialect_loss_table(Check& c) {
    VectorD u(2), v(2);
    u << 1, 0;
    c.expect(std::abs(training::dialect_loss<double>(u, u, 1, 0.25)) < 1e-9, "identical positive");
    v << 0, 1;
    c.expect(std::abs(training::dialect_loss<double>(u, v, -1, 0.25)) < 1e-9, "orthogonal negative");
    v << 0.5, std::sqrt(0.75);
    c.expect(std::abs(training::dialect_loss<double>(u, v, -1, 0.25) - 0.25) < 1e-9, "sim 0.5 negative");
    Rng rng(8);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        VectorD a(6), b(6);
        for (int k = 0; k < 6; ++k) a(k) = rng.normal();
        for (int k = 0; k < 6; ++k) b(k) = rng.normal();
        const double s = 0.01 + 10.0 * rng.uniform01();
        for (int y : {1, -1}) {
            const double base = training::dialect_loss<double>(a, b, y, 0.25);
            worst = std::max(worst, std::abs(training::dialect_loss<double>(VectorD(s * a), b, y, 0.25) - base));
            worst = std::max(worst, std::abs(training::dialect_loss<double>(a, VectorD(s * b), y, 0.25) - base));
        }
    }
    c.expect(worst < 1e-6, "scale gap " + num(worst));
}

// 4
void gradient_checks(Check& c) {
    Rng rng(30);
    int dialect_done = 0;
    double worst = 0;
    for (int trial = 0; trial < 100 && dialect_done < 6; ++trial) {
        VectorD u(8), x(8);
        for (int k = 0; k < 8; ++k) u(k) = rng.normal();
        for (int k = 0; k < 8; ++k) x(k) = rng.normal();
        const int y = dialect_done < 3 ? 1 : -1;
        const double margin = y == 1 ? 0.25 : -0.9;
        if (y == -1 && training::cosine_similarity(u, x) - margin < 1e-2) continue;  // stay off the kink
        training::Differentiable f{
            [&](const VectorD& v) { return training::dialect_loss<double>(u, v, y, margin); },
            [&](const VectorD& v) { return training::dialect_loss_with_grad<double>(u, v, y, margin).grad_trainable; },
            {}};
        worst = std::max(worst, training::gradcheck(f, x).max_rel_error);
        ++dialect_done;
    }
    c.expect(dialect_done == 6, "only " + std::to_string(dialect_done) + " dialect instances");
    c.expect(worst < 1e-4, "dialect loss rel error " + num(worst));

    worst = 0;
    for (int trial = 0; trial < 3; ++trial) {
        const lm::TokenSequence toks{1, 3, 0, 2, 2, 1};
        const training::TargetSpan span{4, 6};
        VectorD x(5 * 4);
        for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
        auto as_matrix = [](const VectorD& v) { return MatrixD(Eigen::Map<const MatrixD>(v.data(), 5, 4)); };
        training::Differentiable f{
            [&](const VectorD& v) { return training::target_nll<double>(as_matrix(v), toks, span); },
            [&](const VectorD& v) {
                MatrixD d;
                training::target_nll<double>(as_matrix(v), toks, span, &d);
                return VectorD(Eigen::Map<const VectorD>(d.data(), d.size()));
            },
            {}};
        worst = std::max(worst, training::gradcheck(f, x).max_rel_error);
    }
    c.expect(worst < 1e-4, "task loss rel error " + num(worst));

    // The same check through the decoder: task-adapter gradients from backprop.
    lm::TinyDecoder<double> m(small(8));
    auto dialect = adapters::inject(m.linear_layers(), adapters::AdapterConfig{2, 4.0, 0.3, {}}, AdapterRole::dialect, 1);
    auto task = adapters::inject(m.linear_layers(), adapters::AdapterConfig{2, 4.0, 0.3, {}}, AdapterRole::task, 2);
    randomize_b(dialect, 0.2, 3);
    randomize_b(task, 0.2, 4);
    adapters::set_trainable(dialect, false);
    const lm::TokenSequence toks{33, 34, lm::CharTokenizer::kMask, 40, 41, lm::CharTokenizer::kEndOfAnswer};
    const std::span<const lm::TokenId> input(toks.data(), toks.size() - 1);
    const training::TargetSpan span{4, 6};
    auto entries = task.entries();
    auto put = [&](const VectorD& v) {
        Eigen::Index k = 0;
        for (auto* a : entries) {
            for (Eigen::Index i = 0; i < a->B.size(); ++i) a->B.data()[i] = v(k++);
        }
    };
    VectorD x0;
    {
        std::vector<double> flat;
        for (auto* a : entries) flat.insert(flat.end(), a->B.data(), a->B.data() + a->B.size());
        x0 = Eigen::Map<VectorD>(flat.data(), static_cast<Eigen::Index>(flat.size()));
    }
    training::Differentiable f{[&](const VectorD& v) {
                                   put(v);
                                   return training::target_nll<double>(m.forward(input).logits, toks, span);
                               },
                               [&](const VectorD& v) {
                                   put(v);
                                   task.zero_grad();
                                   const auto cache = m.forward_with_cache(input);
                                   MatrixD d;
                                   training::target_nll<double>(cache.logits, toks, span, &d);
                                   m.backward(cache, d, MatrixD());
                                   std::vector<double> g;
                                   for (auto* a : entries) g.insert(g.end(), a->grad_B.data(), a->grad_B.data() + a->grad_B.size());
                                   return VectorD(Eigen::Map<VectorD>(g.data(), static_cast<Eigen::Index>(g.size())));
                               },
                               {}};
    training::GradCheckOptions opts;
    opts.seed = 11;
    const double model_err = training::gradcheck(f, x0, opts).max_rel_error;
    c.expect(model_err < 1e-4, "decoder backprop rel error " + num(model_err));
}

// 5
void stacking_and_merge(Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    adapters::LayerList<double> layers;
    MatrixD w0(2, 2);
    w0 << 0.5, -1.0, 2.0, 0.25;
    layers.emplace_back("l", w0);
    auto d = adapters::inject(layers, adapters::AdapterConfig{1, 3.0, 0.02, {}}, AdapterRole::dialect, 1);
    auto t = adapters::inject(layers, adapters::AdapterConfig{1, 0.5, 0.02, {}}, AdapterRole::task, 2);
    d.entry("l").A << 0.3, -0.7;
    d.entry("l").B << 1.1, 0.4;
    t.entry("l").A << -0.2, 0.9;
    t.entry("l").B << 0.6, -1.5;
    MatrixD x(2, 2);
    x << 1.0, 2.0, -0.5, 0.75;
    const MatrixD got = layers[0].forward(x, {true, true});
    for (Eigen::Index r = 0; r < 2; ++r) {
        const double x0 = x(r, 0), x1 = x(r, 1);
        const double ad = 0.3 * x0 - 0.7 * x1, at = -0.2 * x0 + 0.9 * x1;
        const double y0 = 0.5 * x0 - 1.0 * x1 + 3.0 * 1.1 * ad + 0.5 * 0.6 * at;
        const double y1 = 2.0 * x0 + 0.25 * x1 + 3.0 * 0.4 * ad + 0.5 * -1.5 * at;
        c.expect(std::abs(got(r, 0) - y0) < 1e-6 && std::abs(got(r, 1) - y1) < 1e-6, "hand-computed row " + std::to_string(r));
    }

    lm::TinyDecoder<float> m(small(32));
    auto md = adapters::inject(m.linear_layers(), adapters::AdapterConfig{4, 8.0, 0.02, {}}, AdapterRole::dialect, 1);
    auto mt = adapters::inject(m.linear_layers(), adapters::AdapterConfig{4, 8.0, 0.02, {}}, AdapterRole::task, 2);
    randomize_b(md, 0.05, 3);
    randomize_b(mt, 0.05, 4);
    Rng rng(5);
    std::vector<lm::TokenSequence> inputs;
    std::vector<MatrixF> adapted;
    for (int i = 0; i < 16; ++i) {
        inputs.push_back(random_tokens(rng, 24));
        adapted.push_back(m.forward(inputs.back()).logits);
    }
    adapters::merge(m.linear_layers(), adapters::stack(md, mt));
    double worst = 0;
    for (int i = 0; i < 16; ++i) worst = std::max<double>(worst, (m.forward(inputs[i]).logits - adapted[i]).cwiseAbs().maxCoeff());
    c.expect(worst < 1e-5, "merged vs adapted " + num(worst));
    c.expect(seconds_since(t0) < 10.0, "took " + num(seconds_since(t0)) + " s");
}

std::vector<corpus::MaskedExample> tiny_examples() {
    std::vector<corpus::MaskedExample> out;
    for (const char* f : {"en-US.jsonl", "en-IN.jsonl"}) {
        for (const auto& conv : corpus::load_conversations(source_dir() / "data/tiny" / f)) {
            out.push_back(corpus::mask_conversation(conv));
        }
    }
    return out;
}

// 6
void freeze_soundness(Check& c) {
    const auto examples = tiny_examples();
    const auto tmpl = corpus::PromptTemplate::default_template();
    lm::TinyDecoder<float> m(small(32, 256));
    const lm::TinyDecoder<float> ref(small(32, 256));

    auto dialect = adapters::inject(m.linear_layers(), adapters::AdapterConfig{4, 8.0, 0.02, {}}, AdapterRole::dialect, 1);
    std::vector<corpus::MaskedExample> us, in;
    for (const auto& e : examples) (e.dialect == corpus::Dialect::en_US ? us : in).push_back(e);
    const auto pairs = corpus::build_parallel_pairs(us, in, 4, 13);
    training::DialectTrainConfig dcfg;
    dcfg.epochs = 3;
    dcfg.learning_rate = 1e-3;
    const auto before_dialect_ckpt = adapters::snapshot(dialect);
    training::train_dialect(m, dialect, pairs, {}, examples, tmpl, dcfg);
    c.expect(m.base_weights_equal(ref), "base weights moved during dialect training");
    c.expect(!(adapters::snapshot(dialect) == before_dialect_ckpt), "dialect training did not update the dialect set");

    adapters::set_trainable(dialect, false);
    const auto frozen = adapters::snapshot(dialect);
    auto task = adapters::inject(m.linear_layers(), adapters::AdapterConfig{4, 8.0, 0.02, {}}, AdapterRole::task, 2);
    auto st = adapters::stack(dialect, task);
    training::TaskTrainConfig tcfg;
    tcfg.epochs = 3;
    tcfg.batch_size = 2;
    tcfg.learning_rate = 1e-2;
    training::train_task(m, st, examples, {}, tmpl, tcfg);
    c.expect(adapters::snapshot(dialect) == frozen, "dialect set changed during task training");
    c.expect(m.base_weights_equal(ref), "base weights moved during task training");
}

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    if (out_text) *out_text = out.str() + err.str();
    return code;
}

// 7: the whole pipeline on the 8 tiny conversations through the CLI.
bool overfit_run(Check& c, const fs::path& out, double* seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string log;
    const int code = run_cli({"--config", (source_dir() / "configs/tiny_overfit.ini").string(), "--out", out.string(),
                              "--seed", "13", "--jobs", "1", "prepare"},
                             &log);
    c.expect(code == 0, "prepare failed: " + log);
    if (code != 0) return false;
    for (const std::vector<std::string>& step : {std::vector<std::string>{"pairs"},
                                                 std::vector<std::string>{"train", "--stage", "dialect"},
                                                 std::vector<std::string>{"train", "--stage", "task"},
                                                 std::vector<std::string>{"eval"}}) {
        std::vector<std::string> args{"--config", (source_dir() / "configs/tiny_overfit.ini").string(), "--out",
                                      out.string(), "--seed", "13"};
        args.insert(args.end(), step.begin(), step.end());
        const int rc = run_cli(args, &log);
        c.expect(rc == 0, step[0] + " failed: " + log);
        if (rc != 0) return false;
    }
    *seconds = seconds_since(t0);
    return true;
}

void overfit_smoke(Check& c, const fs::path& out) {
    double secs = 0;
    if (!overfit_run(c, out, &secs)) return;
    const auto scores = nlohmann::json::parse(slurp(out / "eval/scores.json"));
    const auto& r = scores.at("results").at(0);
    const double acc = r.contains("accuracy") ? r.at("accuracy").get<double>() : r.at("scores").at(0).at("accuracy").get<double>();
    const std::size_t n = corpus::load_masked(out / "masked/en-US.jsonl").size() + corpus::load_masked(out / "masked/en-IN.jsonl").size();
    c.expect(n == 8, "expected 8 conversations, got " + std::to_string(n));
    c.expect(acc >= 90.0, "train accuracy " + num(acc));
    c.expect(secs < 300.0, "took " + num(secs) + " s");
    std::cout << "      overfit: accuracy " << num(acc) << "% in " << num(secs) << " s\n";
}

// 8
void masking_fidelity(Check& c) {
    const auto fish = fisherman_conversation();
    const auto f = corpus::mask_conversation(fish);
    c.expect(f.masked_turns.size() == 4, "fisherman turn count");
    if (f.masked_turns.size() == 4) {
        for (std::size_t i = 0; i < 3; ++i) c.expect(f.masked_turns[i] == fish.turns[i], "fisherman turn " + std::to_string(i));
        c.expect(f.masked_turns[3] == guesser("[MASK]"), "fisherman final turn");
    }
    const auto planet = planet_conversation();
    const auto p = corpus::mask_conversation(planet);
    c.expect(p.masked_turns.size() == 2, "planet keeps two turns");
    if (p.masked_turns.size() == 2) {
        c.expect(p.masked_turns[0] == planet.turns[0], "planet first turn");
        c.expect(p.masked_turns[1] == guesser("[MASK]"), "planet final turn");
    }
}

// 9
void pair_soundness(Check& c) {
    std::map<corpus::Dialect, std::vector<corpus::MaskedExample>> train;
    for (const auto& entry : fs::directory_iterator(source_dir() / "data/fixture")) {
        if (entry.path().extension() != ".jsonl") continue;
        for (const auto& conv : corpus::load_conversations(entry.path())) {
            if (conv.split == corpus::Split::train) train[conv.dialect].push_back(corpus::mask_conversation(conv));
        }
    }
    for (const char* s : {"en-US || en-IN", "en-US || en-NG", "en-US || IN-MV", "en-US || NG-MV", "en-IN || IN-TR"}) {
        const auto spec = corpus::parse_corpus_spec(s);
        const auto& a = train[spec.frozen_side];
        const auto& b = train[spec.focus_side];
        const auto pairs = corpus::build_parallel_pairs(a, b, corpus::default_max_negatives(spec), 13);
        std::map<std::string, std::string> target;
        for (const auto& e : a) target[e.source_id] = text::normalize_target(e.target_word);
        for (const auto& e : b) target[e.source_id] = text::normalize_target(e.target_word);
        std::size_t brute = 0;
        for (const auto& x : a) {
            for (const auto& y : b) brute += target[x.source_id] == target[y.source_id];
        }
        const auto counts = corpus::count_pairs(pairs);
        c.expect(counts.positives == brute && brute > 0, std::string(s) + ": positives " + std::to_string(counts.positives) +
                                                             " vs exhaustive " + std::to_string(brute));
        std::size_t mislabeled = 0;
        for (const auto& p : pairs) mislabeled += (p.label == 1) != (target.at(p.us_id) == target.at(p.x_id));
        c.expect(mislabeled == 0, std::string(s) + ": " + std::to_string(mislabeled) + " mislabeled");
    }
}

// 10
void report_arithmetic(Check& c) {
    const auto j = nlohmann::json::parse(slurp(source_dir() / "tests/data/published_baselines.json"));
    const auto rep = eval::build_report(eval::result_sets_from_json(j), eval::report_spec_from_json(j));
    std::multiset<double> expected_ok{27.3, 64.7, 13.4, 43.1, 17.9, 11.4, 33.8, 5.8, 12.0, 25.0};
    std::vector<double> unreconciled;
    for (const auto& r : rep.reconciliations) {
        const double v = r.published.value;
        if (!r.reconciled) {
            unreconciled.push_back(v);
            continue;
        }
        c.expect(std::abs(r.computed - v) <= 1.0, "computed " + num(r.computed) + " for published " + num(v));
        if (auto it = expected_ok.find(v); it != expected_ok.end()) expected_ok.erase(it);
    }
    c.expect(expected_ok.empty(), std::to_string(expected_ok.size()) + " consistent entries not reproduced");
    std::sort(unreconciled.begin(), unreconciled.end());
    c.expect(unreconciled == std::vector<double>{4.5, 28.1}, "unreconciled set has " + std::to_string(unreconciled.size()) + " entries");
    c.expect(eval::to_json(rep).at("status") == "UNRECONCILED", "report status not flagged");
}

// Manifest minus wall-clock fields: the write time, timings, and digests of
// metrics files (which record per-epoch seconds).
std::string manifest_sans_clock(const fs::path& p) {
    auto j = nlohmann::json::parse(slurp(p));
    j.erase("written_at");
    j.erase("timings");
    for (const char* side : {"inputs", "outputs"}) {
        if (!j.contains(side)) continue;
        auto& list = j[side];
        for (auto it = list.begin(); it != list.end();) {
            const auto path = it->at("path").get<std::string>();
            it = path.ends_with("metrics.jsonl") ? list.erase(it) : it + 1;
        }
    }
    return j.dump();
}

// 11: checkpoints, predictions, reports and manifests of two identical runs.
void determinism(Check& c, const fs::path& first, const fs::path& second) {
    double secs = 0;
    if (!overfit_run(c, second, &secs)) return;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(first)) {
        if (e.is_regular_file() && e.path().filename() != "metrics.jsonl") files.push_back(fs::relative(e.path(), first));
    }
    std::sort(files.begin(), files.end());
    for (const char* f : {"eval/predictions.jsonl", "eval/report.json", "task/checkpoint"}) {
        c.expect(fs::exists(first / f), std::string(f) + " was not produced");
    }
    c.expect(files.size() > 8, "too few artifacts: " + std::to_string(files.size()));
    for (const auto& rel : files) {
        if (!fs::exists(second / rel)) {
            c.expect(false, rel.string() + " missing in the second run");
            continue;
        }
        const bool manifest = rel.filename().string().ends_with("manifest.json");
        const bool same = manifest ? manifest_sans_clock(first / rel) == manifest_sans_clock(second / rel)
                                   : slurp(first / rel) == slurp(second / rel);
        c.expect(same, rel.string() + " differs");
    }
}

}  // namespace

int main() {
    TempDir work("lordd-acceptance");
    const fs::path run_a = work / "run-a", run_b = work / "run-b";
    const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
        {"adapter identity at init", identity_at_init},
        {"task loss oracle", task_loss_oracle},
        {"dialect loss table and scale invariance", dialect_loss_table},
        {"gradient checks", gradient_checks},
        {"stacking and merge equivalence", stacking_and_merge},
        {"freeze soundness", freeze_soundness},
        {"end-to-end overfit", [&](Check& c) { overfit_smoke(c, run_a); }},
        {"masking fidelity", masking_fidelity},
        {"pair builder soundness", pair_soundness},
        {"report arithmetic", report_arithmetic},
        {"determinism", [&](Check& c) { determinism(c, run_a, run_b); }},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        char head[128];
        std::snprintf(head, sizeof head, "%s %2zu  %-42s %7.2f s", c.failed ? "FAIL" : "PASS", i + 1,
                      criteria[i].first.c_str(), seconds_since(t0));
        std::cout << head;
        for (const auto& n : c.notes) std::cout << "  [" << n << "]";
        std::cout << std::endl;
        failures += c.failed;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed\n";
    return failures == 0 ? 0 : 1;
}
