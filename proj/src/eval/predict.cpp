#include "lordd/eval/predict.hpp"

#include <fstream>

#include <json.hpp>

#include "lordd/error.hpp"
#include "lordd/text.hpp"

namespace lordd::eval {

template <typename Scalar>
Prediction predict_target(const lm::LanguageModel<Scalar>& model, const corpus::MaskedExample& ex,
                          const corpus::PromptTemplate& tmpl, int max_new) {
    if (max_new < 1) throw ArgumentError("max_new must be >= 1");
    Prediction p;
    const lm::TokenSequence prompt = model.tokenize(corpus::render_prompt(ex, tmpl));
    if (prompt.size() > static_cast<std::size_t>(model.descriptor().context_len)) {
        p.flags.push_back("context_overflow");
        return p;
    }
    const auto g = lm::generate_greedy(model, prompt, max_new, {model.descriptor().end_token_id});
    if (!g.stopped) p.flags.push_back("no_stop");
    p.text = text::trim(g.text);
    if (p.text.empty()) p.flags.push_back("empty_prediction");
    return p;
}

template <typename Scalar>
std::vector<EvalResult> evaluate(const lm::LanguageModel<Scalar>& model, std::span<const corpus::MaskedExample> examples,
                                 const corpus::PromptTemplate& tmpl, const Embedder& embedder,
                                 const EvalOptions& opts) {
    std::vector<EvalResult> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) {
        Prediction p = predict_target(model, ex, tmpl, opts.max_new);
        EvalResult r;
        r.example_id = ex.source_id;
        r.prediction = std::move(p.text);
        r.reference = ex.target_word;
        r.correct = answers_match(r.prediction, r.reference);
        bool fallback = false;
        r.similarity = pair_similarity(embedder, r.prediction, r.reference, opts.similarity, &fallback);
        r.flags = std::move(p.flags);
        if (fallback) r.flags.push_back("embedding_fallback");
        out.push_back(std::move(r));
    }
    return out;
}

void write_predictions(const std::filesystem::path& path, std::span<const EvalResult> results) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& r : results) {
        nlohmann::ordered_json j;
        j["example_id"] = r.example_id;
        j["prediction"] = r.prediction;
        j["reference"] = r.reference;
        j["correct"] = r.correct;
        j["similarity"] = r.similarity;
        j["flags"] = r.flags;
        out << j.dump() << '\n';
    }
}

std::vector<EvalResult> read_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<EvalResult> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            EvalResult r;
            r.example_id = j.at("example_id").get<std::string>();
            r.prediction = j.at("prediction").get<std::string>();
            r.reference = j.at("reference").get<std::string>();
            r.correct = j.at("correct").get<bool>();
            r.similarity = j.at("similarity").get<double>();
            r.flags = j.value("flags", std::vector<std::string>{});
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

#define LORDD_EVAL_INSTANTIATE(S)                                                                                   \
    template Prediction predict_target(const lm::LanguageModel<S>&, const corpus::MaskedExample&,                 \
                                       const corpus::PromptTemplate&, int);                                         \
    template std::vector<EvalResult> evaluate(const lm::LanguageModel<S>&, std::span<const corpus::MaskedExample>, \
                                              const corpus::PromptTemplate&, const Embedder&, const EvalOptions&);

LORDD_EVAL_INSTANTIATE(float)
LORDD_EVAL_INSTANTIATE(double)

}  // namespace lordd::eval
