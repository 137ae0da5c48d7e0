#include "lordd/corpus/masking.hpp"

#include "lordd/error.hpp"

namespace lordd::corpus {

MaskedExample mask_conversation(const Conversation& conv) {
    const auto answer = conv.turns.empty() ? std::nullopt : find_answer_turn(conv);
    if (!answer) {
        throw MaskingError("conversation " + conv.id + ": no guesser turn contains '" +
                           conv.target_word + "'");
    }
    MaskedExample ex;
    ex.source_id = conv.id;
    ex.dialect = conv.dialect;
    ex.split = conv.split;
    ex.target_word = conv.target_word;
    ex.masked_turns.assign(conv.turns.begin(), conv.turns.begin() + static_cast<std::ptrdiff_t>(*answer) + 1);
    ex.masked_turns.back().text = std::string(kMaskToken);
    for (std::size_t i = 0; i + 1 < ex.masked_turns.size(); ++i) {
        const std::string& t = ex.masked_turns[i].text;
        if (contains_target(t, conv.target_word)) {
            throw MaskingError("conversation " + conv.id + ": describer turn " + std::to_string(i) +
                               " already states the target word");
        }
        if (t.find(kMaskToken) != std::string::npos) {
            throw MaskingError("conversation " + conv.id + ": turn " + std::to_string(i) +
                               " contains a literal [MASK]");
        }
    }
    return ex;
}

Conversation unmask(const MaskedExample& ex) {
    Conversation conv;
    conv.id = ex.source_id;
    conv.dialect = ex.dialect;
    conv.split = ex.split;
    conv.target_word = ex.target_word;
    conv.turns = ex.masked_turns;
    if (!conv.turns.empty()) conv.turns.back().text = ex.target_word;
    return conv;
}

}  // namespace lordd::corpus
