#include "lordd/corpus/pairs.hpp"

#include <algorithm>

#include "lordd/error.hpp"
#include "lordd/rng.hpp"
#include "lordd/text.hpp"

namespace lordd::corpus {

namespace {

std::vector<std::string> normalized_targets(std::span<const MaskedExample> side) {
    std::vector<std::string> out;
    out.reserve(side.size());
    for (const MaskedExample& ex : side) out.push_back(text::normalize_target(ex.target_word));
    return out;
}

}  // namespace

std::vector<ContrastivePair> build_parallel_pairs(std::span<const MaskedExample> side_a,
                                                  std::span<const MaskedExample> side_b,
                                                  std::size_t max_negatives, std::uint64_t seed) {
    if (side_a.empty() || side_b.empty()) {
        throw ArgumentError("build_parallel_pairs: both sides must be nonempty");
    }
    const auto ta = normalized_targets(side_a);
    const auto tb = normalized_targets(side_b);

    struct Cell {
        std::size_t a;
        std::size_t b;
        int label;
    };
    std::vector<Cell> chosen;
    std::vector<Cell> negatives;
    for (std::size_t i = 0; i < side_a.size(); ++i) {
        for (std::size_t j = 0; j < side_b.size(); ++j) {
            if (side_a[i].dialect == side_b[j].dialect) {
                throw ArgumentError("build_parallel_pairs: example " + side_a[i].source_id + " and " +
                                    side_b[j].source_id + " share a dialect");
            }
            if (ta[i] == tb[j]) {
                chosen.push_back({i, j, 1});
            } else {
                negatives.push_back({i, j, -1});
            }
        }
    }
    Rng rng(seed);
    for (std::size_t k : rng.sample_indices(negatives.size(), max_negatives)) chosen.push_back(negatives[k]);
    std::sort(chosen.begin(), chosen.end(),
              [](const Cell& l, const Cell& r) { return l.a != r.a ? l.a < r.a : l.b < r.b; });

    std::vector<ContrastivePair> pairs;
    pairs.reserve(chosen.size());
    for (const Cell& c : chosen) pairs.push_back({side_a[c.a].source_id, side_b[c.b].source_id, c.label});
    return pairs;
}

PairCounts count_pairs(std::span<const ContrastivePair> pairs) {
    PairCounts c;
    c.samples = pairs.size();
    for (const ContrastivePair& p : pairs) (p.label == 1 ? c.positives : c.negatives) += 1;
    return c;
}

std::size_t count_same_target_pairs(std::span<const MaskedExample> side_a,
                                    std::span<const MaskedExample> side_b) {
    std::size_t n = 0;
    for (const MaskedExample& a : side_a) {
        for (const MaskedExample& b : side_b) {
            if (text::normalize_target(a.target_word) == text::normalize_target(b.target_word)) ++n;
        }
    }
    return n;
}

std::string CorpusSpec::to_string() const {
    return std::string(corpus::to_string(frozen_side)) + " || " + std::string(corpus::to_string(focus_side));
}

CorpusSpec parse_corpus_spec(std::string_view spec) {
    const std::size_t bar = spec.find("||");
    if (bar == std::string_view::npos) {
        throw ConfigError("parallel corpus spec '" + std::string(spec) + "' must look like 'en-US || en-IN'");
    }
    CorpusSpec out;
    try {
        out.frozen_side = parse_dialect(text::trim(spec.substr(0, bar)));
        out.focus_side = parse_dialect(text::trim(spec.substr(bar + 2)));
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("parallel corpus spec: ") + e.what());
    }
    if (out.frozen_side == out.focus_side) {
        throw ConfigError("parallel corpus spec '" + std::string(spec) + "' pairs a dialect with itself");
    }
    return out;
}

std::size_t default_max_negatives(const CorpusSpec& spec) {
    auto natural = [](Dialect d) { return d == Dialect::en_US || d == Dialect::en_IN || d == Dialect::en_NG; };
    if (!natural(spec.frozen_side) || !natural(spec.focus_side)) return 100;
    if (spec.focus_side == Dialect::en_NG || spec.frozen_side == Dialect::en_NG) return 155;
    return 133;
}

}  // namespace lordd::corpus
