#include "lordd/eval/metrics.hpp"

#include <cmath>
#include <cstdint>

#include "lordd/error.hpp"
#include "lordd/text.hpp"

namespace lordd::eval {

namespace {

bool strippable(char c) {
    switch (c) {
        case '.': case ',': case '!': case '?': case '\'': case '"':
        case ' ': case '\t': case '\n': case '\r':
            return true;
        default:
            return false;
    }
}

}  // namespace

std::string normalize_answer(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && strippable(s[b])) ++b;
    while (e > b && strippable(s[e - 1])) --e;
    return text::collapse_whitespace(text::ascii_lower(s.substr(b, e - b)));
}

bool answers_match(std::string_view prediction, std::string_view reference) {
    const std::string p = normalize_answer(prediction);
    return !p.empty() && p == normalize_answer(reference);
}

TrigramEmbedder::TrigramEmbedder(int dim) : dim_(dim) {
    if (dim < 1) throw ArgumentError("embedder dimension must be positive");
}

std::string TrigramEmbedder::id() const { return "char-trigram-fnv1a/" + std::to_string(dim_); }

int TrigramEmbedder::bucket(std::string_view trigram) const {
    std::uint32_t h = 2166136261u;
    for (unsigned char c : trigram) {
        h ^= c;
        h *= 16777619u;
    }
    return static_cast<int>(h % static_cast<std::uint32_t>(dim_));
}

std::vector<std::string> TrigramEmbedder::trigrams(std::string_view text) const {
    if (text.empty()) return {};
    const std::string padded = "^" + std::string(text) + "$";
    std::vector<std::string> out;
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.push_back(padded.substr(i, 3));
    return out;
}

Embedding TrigramEmbedder::embed(std::string_view text) const {
    Embedding e;
    e.vec = VectorD::Zero(dim_);
    for (const auto& g : trigrams(text)) e.vec(bucket(g)) += 1.0;
    const double n = e.vec.norm();
    if (n == 0.0) {
        e.vec(0) = 1.0;
        e.fallback = true;
    } else {
        e.vec /= n;
    }
    return e;
}

double pair_similarity(const Embedder& embedder, std::string_view prediction, std::string_view reference,
                       const SimilarityOptions& opts, bool* fallback) {
    const Embedding a = opts.normalized ? embedder.embed(normalize_answer(prediction)) : embedder.embed(prediction);
    const Embedding b = opts.normalized ? embedder.embed(normalize_answer(reference)) : embedder.embed(reference);
    if (fallback) *fallback = a.fallback || b.fallback;
    const double c = a.vec.dot(b.vec) / (a.vec.norm() * b.vec.norm());
    return std::max(-1.0, std::min(1.0, c));
}

double accuracy(std::span<const EvalResult> results) {
    if (results.empty()) throw ArgumentError("accuracy of an empty result set");
    std::size_t hits = 0;
    for (const auto& r : results) hits += r.correct ? 1 : 0;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(results.size());
}

double similarity(std::span<const EvalResult> results, const Embedder& embedder, const SimilarityOptions& opts) {
    if (results.empty()) throw ArgumentError("similarity of an empty result set");
    double s = 0.0;
    for (const auto& r : results) s += pair_similarity(embedder, r.prediction, r.reference, opts);
    return 100.0 * s / static_cast<double>(results.size());
}

double relative_difference(double value, double reference) {
    if (reference == 0.0) throw ArgumentError("relative difference against a zero reference");
    return 100.0 * (value - reference) / reference;
}

}  // namespace lordd::eval
