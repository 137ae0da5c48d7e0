#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lordd/corpus/conversation.hpp"

namespace lordd::corpus {

struct PairCounts {
    std::size_t samples = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

// Every cross pair with equal normalized targets is a positive; negatives
// are a seeded uniform sample of at most max_negatives unequal cross pairs.
// Output is ordered by (index in side_a, index in side_b).
std::vector<ContrastivePair> build_parallel_pairs(std::span<const MaskedExample> side_a,
                                                  std::span<const MaskedExample> side_b,
                                                  std::size_t max_negatives, std::uint64_t seed);

PairCounts count_pairs(std::span<const ContrastivePair> pairs);

// Exhaustive same-target cross-pair count; the oracle for positives.
std::size_t count_same_target_pairs(std::span<const MaskedExample> side_a,
                                    std::span<const MaskedExample> side_b);

// A corpus spec such as "en-US || en-IN": left side is frozen.
struct CorpusSpec {
    Dialect frozen_side = Dialect::en_US;
    Dialect focus_side = Dialect::en_IN;

    std::string to_string() const;
};

CorpusSpec parse_corpus_spec(std::string_view spec);

// Negative-sample cap per corpus: 133 / 155 for the natural en-IN / en-NG
// corpora, 100 for corpora with a transformed side.
std::size_t default_max_negatives(const CorpusSpec& spec);

}  // namespace lordd::corpus
