#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "lordd/corpus/prompt.hpp"
#include "lordd/error.hpp"
#include "lordd/eval/metrics.hpp"
#include "lordd/eval/predict.hpp"
#include "lordd/eval/report.hpp"
#include "lordd/rng.hpp"
#include "test_support.hpp"

using namespace lordd;
using namespace lordd::eval;
using namespace lordd::testing;

namespace {

EvalResult result(std::string pred, std::string ref) {
    EvalResult r;
    r.prediction = std::move(pred);
    r.reference = std::move(ref);
    r.correct = answers_match(r.prediction, r.reference);
    return r;
}

std::set<int> buckets(const TrigramEmbedder& e, const std::string& s) {
    std::set<int> out;
    for (const auto& t : e.trigrams(normalize_answer(s))) out.insert(e.bucket(t));
    return out;
}

// Two strings whose hashed trigram sets do not meet.
std::pair<std::string, std::string> disjoint_pair(const TrigramEmbedder& e) {
    const std::vector<std::string> pool{"umbrella", "pizza", "kite", "bicycle", "fox", "jug", "wax", "quilt"};
    for (std::size_t i = 0; i < pool.size(); ++i) {
        for (std::size_t j = i + 1; j < pool.size(); ++j) {
            const auto a = buckets(e, pool[i]), b = buckets(e, pool[j]);
            std::vector<int> both;
            std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
            if (both.empty()) return {pool[i], pool[j]};
        }
    }
    return {};
}

nlohmann::json published_baselines() {
    std::ifstream in(source_dir() / "tests/data/published_baselines.json");
    return nlohmann::json::parse(in);
}

RowKey key(std::string method, std::string data, std::string test, std::string corpus = "") {
    return {std::move(method), std::move(data), std::move(corpus), "", std::move(test)};
}

}  // namespace

TEST(Normalize, Examples) {
    EXPECT_EQ(normalize_answer("Fisherman."), "fisherman");
    EXPECT_EQ(normalize_answer("  washing   machine "), "washing machine");
    EXPECT_EQ(normalize_answer("\"Pizza!\""), "pizza");
    EXPECT_EQ(normalize_answer("Justin\tBieber"), "justin bieber");
    EXPECT_TRUE(answers_match("PIZZA?", "pizza"));
    EXPECT_FALSE(answers_match("pizzas", "pizza"));
    EXPECT_FALSE(answers_match("", ""));
}

TEST(Accuracy, CountsAndOracle) {
    std::vector<EvalResult> rs;
    for (int i = 0; i < 160; ++i) rs.push_back(result(i < 72 ? "Kite" : "Wrong", "kite"));
    EXPECT_DOUBLE_EQ(accuracy(rs), 45.0);
    EXPECT_THROW(accuracy(std::vector<EvalResult>{}), ArgumentError);

    Rng rng(2);
    const std::vector<std::string> words{"kite", "Kite.", "kites", "fox", " FOX "};
    std::vector<EvalResult> mixed;
    std::size_t hits = 0;
    for (int i = 0; i < 200; ++i) {
        const auto& p = words[rng.below(words.size())];
        const auto& r = words[rng.below(words.size())];
        mixed.push_back(result(p, r));
        // Recount by hand: lowercase, drop punctuation and spaces at the ends.
        auto strip = [](std::string s) {
            std::string t;
            for (char c : s) {
                if (c != '.' && c != ' ') t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            }
            return t;
        };
        hits += strip(p) == strip(r);
    }
    EXPECT_DOUBLE_EQ(accuracy(mixed), 100.0 * static_cast<double>(hits) / 200.0);
}

TEST(Similarity, IdenticalDisjointAndMixture) {
    const TrigramEmbedder e;
    std::vector<EvalResult> same{result("umbrella", "Umbrella"), result("kite", "kite")};
    EXPECT_NEAR(similarity(same, e), 100.0, 1e-9);

    const auto [a, b] = disjoint_pair(e);
    ASSERT_FALSE(a.empty());
    std::vector<EvalResult> apart{result(a, b)};
    EXPECT_NEAR(similarity(apart, e), 0.0, 1e-12);

    std::vector<EvalResult> mix{result(a, a), result(a, b)};
    EXPECT_NEAR(similarity(mix, e), 50.0, 1e-9);
    std::reverse(mix.begin(), mix.end());
    EXPECT_NEAR(similarity(mix, e), 50.0, 1e-9);
    EXPECT_THROW(similarity(std::vector<EvalResult>{}, e), ArgumentError);
}

TEST(Similarity, BoundedOnRandomStrings) {
    const TrigramEmbedder e;
    Rng rng(5);
    std::vector<EvalResult> rs;
    for (int i = 0; i < 50; ++i) {
        std::string p, r;
        for (int k = 0; k < 6; ++k) p += static_cast<char>('a' + rng.below(5));
        for (int k = 0; k < 6; ++k) r += static_cast<char>('a' + rng.below(5));
        rs.push_back(result(p, r));
    }
    const double s = similarity(rs, e);
    EXPECT_GE(s, -100.0);
    EXPECT_LE(s, 100.0);
}

TEST(Embedder, UnitNormDeterministicAndFallback) {
    const TrigramEmbedder e;
    for (const char* s : {"a", "washing machine", "Justin Bieber"}) {
        const auto v = e.embed(s);
        EXPECT_NEAR(v.vec.norm(), 1.0, 1e-12);
        EXPECT_FALSE(v.fallback);
        EXPECT_EQ(v.vec, e.embed(s).vec);
    }
    EXPECT_TRUE(e.embed("").fallback);
    EXPECT_EQ(e.dim(), 256);
    bool fb = false;
    pair_similarity(e, "", "kite", {}, &fb);
    EXPECT_TRUE(fb);
    EXPECT_THROW(TrigramEmbedder(0), ArgumentError);
}

TEST(RelativeDifference, Examples) {
    EXPECT_NEAR(relative_difference(67.2, 52.8), 27.3, 0.1);
    EXPECT_NEAR(relative_difference(44.8, 27.2), 64.7, 0.1);
    EXPECT_NEAR(relative_difference(59.9, 52.8), 13.4, 0.1);
    EXPECT_EQ(relative_difference(3.5, 3.5), 0.0);
    EXPECT_GT(relative_difference(5, 4), 0.0);
    EXPECT_LT(relative_difference(4, 5), 0.0);
    EXPECT_THROW(relative_difference(1.0, 0.0), ArgumentError);
}

TEST(Report, SingleBackendMuAndSkyline) {
    const auto sky = key("skyline", "en-US", "en-US");
    const auto base = key("in_dialect", "en-IN", "en-IN");
    const auto ours = key("lordd", "en-US + en-IN", "en-IN", "en-US || en-IN");
    const std::vector<ResultSet> sets{{sky, "tiny", {60, 40}, ""}, {base, "tiny", {50, 20}, ""}, {ours, "tiny", {55, 30}, ""}};
    ReportSpec spec;
    spec.skyline = sky;
    spec.in_dialect = {base};
    const auto rep = build_report(sets, spec);
    EXPECT_EQ(rep.backends, std::vector<std::string>{"tiny"});
    EXPECT_DOUBLE_EQ(rep.row(ours).mu.similarity, 55.0);
    EXPECT_DOUBLE_EQ(rep.row(ours).mu.accuracy, 30.0);
    EXPECT_EQ(rep.row(sky).degrade->similarity, 0.0);
    EXPECT_EQ(rep.row(sky).degrade->accuracy, 0.0);
    EXPECT_NEAR(rep.row(ours).improve->accuracy, 50.0, 1e-12);
    EXPECT_NEAR(rep.row(ours).degrade->accuracy, 100.0 * 10.0 / 30.0, 1e-12);
    EXPECT_EQ(rep.row(base).improve->similarity, 0.0);

    const auto table = render_table(rep);
    EXPECT_NE(table.find("lordd"), std::string::npos);
    EXPECT_NE(table.find("tiny"), std::string::npos);
    EXPECT_EQ(to_json(rep)["status"], "ok");
}

TEST(Report, MissingKeyIsNamed) {
    const std::vector<ResultSet> sets{{key("lordd", "a", "en-IN"), "tiny", {1, 1}, ""}};
    ReportSpec spec;
    spec.skyline = key("skyline", "en-US", "en-US");
    try {
        build_report(sets, spec);
        FAIL();
    } catch (const ArgumentError& e) {
        EXPECT_NE(std::string(e.what()).find("skyline"), std::string::npos);
    }
    const std::vector<ResultSet> dup{sets[0], sets[0]};
    EXPECT_THROW(build_report(dup, {}), ArgumentError);
}

TEST(Report, PublishedTableArithmetic) {
    const auto j = published_baselines();
    const auto rep = build_report(result_sets_from_json(j), report_spec_from_json(j));
    EXPECT_EQ(rep.backends, (std::vector<std::string>{"mistral", "gemma"}));
    ASSERT_EQ(rep.reconciliations.size(), 20u);
    std::vector<double> bad;
    for (const auto& r : rep.reconciliations) {
        if (r.reconciled) {
            EXPECT_NEAR(r.computed, r.published.value, 1.0) << r.published.key.str();
        } else {
            bad.push_back(r.published.value);
        }
    }
    std::sort(bad.begin(), bad.end());
    EXPECT_EQ(bad, (std::vector<double>{4.5, 28.1}));
    EXPECT_EQ(rep.unreconciled(), 2u);
    EXPECT_EQ(to_json(rep)["status"], "UNRECONCILED");

    const auto ng = rep.row(key("lordd", "en-US + en-NG", "en-NG", "en-US || en-NG"));
    EXPECT_NEAR(ng.improve->similarity, 11.4, 0.3);
    EXPECT_NEAR(ng.improve->accuracy, 33.8, 0.3);
    const auto in = rep.row(key("lordd", "en-US + en-IN", "en-IN", "en-US || en-IN"));
    EXPECT_NEAR(in.improve->accuracy, 31.1, 0.1);
    EXPECT_NEAR(ng.degrade->accuracy, 7.0, 0.1);
    EXPECT_NE(render_table(rep).find("UNRECONCILED"), std::string::npos);
}

TEST(Report, JsonRoundTripOfKeys) {
    const auto k = key("lordd", "en-US + en-IN", "en-IN", "en-US || en-IN");
    EXPECT_EQ(row_key_from_json(to_json(k)), k);
    EXPECT_THROW(result_sets_from_json(nlohmann::json::parse(R"({"results":[{"key":{}}]})")), ParseError);
}

TEST(Predict, ScriptedAnswerStopsAtEndMarker) {
    const auto ex = masked("ex-1", corpus::Dialect::en_IN, "Cat");
    const auto tmpl = corpus::PromptTemplate::default_template();
    const lm::CharTokenizer tok;
    const auto prompt = tok.encode(corpus::render_prompt(ex, tmpl));
    auto script = tok.encode("Cat");
    script.push_back(lm::CharTokenizer::kEndOfAnswer);
    const StubModel m(lm::CharTokenizer::kVocabSize, 1024, prompt.size(), script);
    const auto p = predict_target(m, ex, tmpl);
    EXPECT_EQ(p.text, "Cat");
    EXPECT_TRUE(p.flags.empty());

    const TrigramEmbedder e;
    const std::vector<corpus::MaskedExample> exs{ex};
    const auto rs = evaluate(m, exs, tmpl, e);
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_TRUE(rs[0].correct);
    EXPECT_NEAR(rs[0].similarity, 1.0, 1e-12);

    TempDir dir;
    write_predictions(dir / "p.jsonl", rs);
    const auto back = read_predictions(dir / "p.jsonl");
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].example_id, "ex-1");
    EXPECT_EQ(back[0].prediction, "Cat");
    EXPECT_TRUE(back[0].correct);
}

TEST(Predict, FlagsOverflowAndNoStop) {
    const auto ex = masked("ex-2", corpus::Dialect::en_IN, "Cat");
    const auto tmpl = corpus::PromptTemplate::default_template();
    const StubModel tiny_ctx(lm::CharTokenizer::kVocabSize, 8);
    const auto over = predict_target(tiny_ctx, ex, tmpl);
    EXPECT_EQ(over.text, "");
    EXPECT_NE(std::find(over.flags.begin(), over.flags.end(), "context_overflow"), over.flags.end());

    const lm::CharTokenizer tok;
    const auto prompt = tok.encode(corpus::render_prompt(ex, tmpl));
    const StubModel babbler(lm::CharTokenizer::kVocabSize, 1024, prompt.size(), tok.encode("a"));
    const auto p = predict_target(babbler, ex, tmpl, 5);
    EXPECT_EQ(p.text, "aaaaa");
    EXPECT_NE(std::find(p.flags.begin(), p.flags.end(), "no_stop"), p.flags.end());
}
