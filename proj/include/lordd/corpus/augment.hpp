#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lordd/corpus/conversation.hpp"

namespace lordd::corpus {

// Number of augmenting examples kept for a given fraction (round to nearest).
std::size_t augment_count(std::size_t pool_size, double us_fraction);

// All of x_train plus a seeded uniform sample (without replacement) of
// round(us_fraction * |us_train|) examples of us_train, shuffled with the
// same seed.
std::vector<MaskedExample> augment(std::span<const MaskedExample> us_train,
                                   std::span<const MaskedExample> x_train,
                                   double us_fraction, std::uint64_t seed);

}  // namespace lordd::corpus
