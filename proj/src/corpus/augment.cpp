#include "lordd/corpus/augment.hpp"

#include <cmath>

#include "lordd/error.hpp"
#include "lordd/rng.hpp"

namespace lordd::corpus {

std::size_t augment_count(std::size_t pool_size, double us_fraction) {
    if (!(us_fraction >= 0.0 && us_fraction <= 1.0)) {
        throw ArgumentError("us_fraction must lie in [0, 1], got " + std::to_string(us_fraction));
    }
    return static_cast<std::size_t>(std::llround(us_fraction * static_cast<double>(pool_size)));
}

std::vector<MaskedExample> augment(std::span<const MaskedExample> us_train,
                                   std::span<const MaskedExample> x_train,
                                   double us_fraction, std::uint64_t seed) {
    const std::size_t keep = augment_count(us_train.size(), us_fraction);
    Rng rng(seed);
    std::vector<MaskedExample> out(x_train.begin(), x_train.end());
    for (std::size_t idx : rng.sample_indices(us_train.size(), keep)) out.push_back(us_train[idx]);
    rng.shuffle(out);
    return out;
}

}  // namespace lordd::corpus
