#pragma once

#include <cstdint>
#include <vector>

#include "lordd/corpus/conversation.hpp"

namespace lordd::corpus {

struct SplitCounts {
    std::size_t train = 0;
    std::size_t valid = 0;
    std::size_t test = 0;
};

// Table of per-subset split sizes the fixture reproduces.
SplitCounts fixture_split_counts(Dialect d);

// Synthetic MD-3-style corpus: every subset at its published split sizes,
// with train-split target overlaps arranged so the pseudo-parallel corpora
// have the published positive counts (11, 13, 97, 97, 42).
std::vector<Conversation> generate_fixture(std::uint64_t seed);

}  // namespace lordd::corpus
