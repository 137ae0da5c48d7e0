#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lordd/corpus/conversation.hpp"
#include "lordd/corpus/prompt.hpp"
#include "lordd/eval/metrics.hpp"
#include "lordd/lm/language_model.hpp"

namespace lordd::eval {

// Room for whole words with a character-level vocabulary.
inline constexpr int kDefaultMaxNew = 24;

struct Prediction {
    std::string text;
    std::vector<std::string> flags;  // "context_overflow", "no_stop", "empty_prediction"
};

// Greedy continuation of the rendered prompt with whatever adapters are
// active on the model, cut at the end-of-answer token and trimmed.
template <typename Scalar>
Prediction predict_target(const lm::LanguageModel<Scalar>& model, const corpus::MaskedExample& ex,
                          const corpus::PromptTemplate& tmpl, int max_new = kDefaultMaxNew);

struct EvalOptions {
    int max_new = kDefaultMaxNew;
    SimilarityOptions similarity;
};

template <typename Scalar>
std::vector<EvalResult> evaluate(const lm::LanguageModel<Scalar>& model, std::span<const corpus::MaskedExample> examples,
                                 const corpus::PromptTemplate& tmpl, const Embedder& embedder,
                                 const EvalOptions& opts = {});

// One JSON object per line, in input order.
void write_predictions(const std::filesystem::path& path, std::span<const EvalResult> results);
std::vector<EvalResult> read_predictions(const std::filesystem::path& path);

}  // namespace lordd::eval
