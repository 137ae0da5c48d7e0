#include "lordd/lm/tokenizer.hpp"

#include "lordd/error.hpp"

namespace lordd::lm {

namespace {
constexpr std::string_view kMaskText = "[MASK]";
constexpr std::string_view kEndText = "[EOA]";
}  // namespace

TokenSequence CharTokenizer::encode(std::string_view text) const {
    TokenSequence ids;
    ids.reserve(text.size());
    for (std::size_t i = 0; i < text.size();) {
        if (text.substr(i, kMaskText.size()) == kMaskText) {
            ids.push_back(kMask);
            i += kMaskText.size();
            continue;
        }
        if (text.substr(i, kEndText.size()) == kEndText) {
            ids.push_back(kEndOfAnswer);
            i += kEndText.size();
            continue;
        }
        const auto c = static_cast<unsigned char>(text[i]);
        if (c == '\n') {
            ids.push_back(kNewline);
        } else if (c >= 32 && c <= 126) {
            ids.push_back(static_cast<TokenId>(c - 32));
        } else {
            throw TokenizationError("character 0x" + std::to_string(c) + " at offset " + std::to_string(i) +
                                    " is outside the tokenizer alphabet");
        }
        ++i;
    }
    return ids;
}

std::string CharTokenizer::decode(std::span<const TokenId> ids) const {
    std::string out;
    out.reserve(ids.size());
    for (TokenId id : ids) {
        if (id >= 0 && id < 95) {
            out.push_back(static_cast<char>(id + 32));
        } else if (id == kNewline) {
            out.push_back('\n');
        } else if (id == kMask) {
            out += kMaskText;
        } else if (id == kEndOfAnswer) {
            out += kEndText;
        } else {
            throw TokenizationError("token id " + std::to_string(id) + " is outside the vocabulary");
        }
    }
    return out;
}

}  // namespace lordd::lm
