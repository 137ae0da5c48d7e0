#include "lordd/training/losses.hpp"

namespace lordd::training {

void validate_span(const lm::TokenSequence& tokens, TargetSpan span, Eigen::Index logit_rows) {
    if (span.start < 2 || span.end < span.start || span.end > tokens.size()) {
        throw ArgumentError("target span [" + std::to_string(span.start) + ", " + std::to_string(span.end) +
                            "] out of bounds for a sequence of " + std::to_string(tokens.size()) + " tokens");
    }
    if (static_cast<Eigen::Index>(span.end) - 1 > logit_rows) {
        throw ArgumentError("target span ends at token " + std::to_string(span.end) + " but only " +
                            std::to_string(logit_rows) + " logit rows were given");
    }
}

}  // namespace lordd::training
