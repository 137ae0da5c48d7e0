#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lordd::lm {

using TokenId = std::int32_t;
using TokenSequence = std::vector<TokenId>;

// Character-level tokenizer over printable ASCII plus newline, with two
// reserved atoms: "[MASK]" and the end-of-answer marker "[EOA]".
class CharTokenizer {
public:
    static constexpr TokenId kNewline = 95;
    static constexpr TokenId kMask = 96;
    static constexpr TokenId kEndOfAnswer = 97;
    static constexpr int kVocabSize = 98;

    TokenSequence encode(std::string_view text) const;
    std::string decode(std::span<const TokenId> ids) const;

    int vocab_size() const { return kVocabSize; }
};

}  // namespace lordd::lm
