#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lordd/types.hpp"

namespace lordd::eval {

// Case-fold, trim, strip terminal . , ! ? ' " and collapse internal whitespace.
std::string normalize_answer(std::string_view s);

struct EvalResult {
    std::string example_id;
    std::string prediction;
    std::string reference;
    bool correct = false;
    double similarity = 0.0;  // cosine in [-1, 1]
    std::vector<std::string> flags;
};

bool answers_match(std::string_view prediction, std::string_view reference);

struct Embedding {
    VectorD vec;
    bool fallback = false;  // no features; vec is the fixed basis vector
};

// embed() returns a unit-norm vector of dim() entries and is deterministic.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Embedding embed(std::string_view text) const = 0;
    virtual int dim() const = 0;
    virtual std::string id() const = 0;
};

// Hashed character trigram counts over "^" + text + "$".
class TrigramEmbedder final : public Embedder {
public:
    explicit TrigramEmbedder(int dim = 256);
    Embedding embed(std::string_view text) const override;
    int dim() const override { return dim_; }
    std::string id() const override;
    int bucket(std::string_view trigram) const;
    std::vector<std::string> trigrams(std::string_view text) const;

private:
    int dim_;
};

struct SimilarityOptions {
    bool normalized = true;  // embed normalize_answer() output rather than the raw strings
};

// Cosine between the embeddings of prediction and reference; sets fallback
// when either side had no features.
double pair_similarity(const Embedder& embedder, std::string_view prediction, std::string_view reference,
                       const SimilarityOptions& opts = {}, bool* fallback = nullptr);

// 100 * correct / total. ArgumentError when empty.
double accuracy(std::span<const EvalResult> results);

// 100 * mean cosine, recomputed with the embedder.
double similarity(std::span<const EvalResult> results, const Embedder& embedder, const SimilarityOptions& opts = {});

// 100 * (value - reference) / reference. ArgumentError when reference is 0.
double relative_difference(double value, double reference);

}  // namespace lordd::eval
