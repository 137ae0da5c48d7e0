#include "lordd/corpus/conversation.hpp"

#include <cctype>

#include "lordd/error.hpp"
#include "lordd/text.hpp"

namespace lordd::corpus {

std::string_view to_string(Dialect d) {
    switch (d) {
        case Dialect::en_US: return "en-US";
        case Dialect::en_IN: return "en-IN";
        case Dialect::en_NG: return "en-NG";
        case Dialect::IN_MV: return "IN-MV";
        case Dialect::NG_MV: return "NG-MV";
        case Dialect::IN_TR: return "IN-TR";
    }
    return "?";
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    return "?";
}

std::string_view to_string(Speaker s) {
    return s == Speaker::describer ? "describer" : "guesser";
}

Dialect parse_dialect(std::string_view s) {
    for (Dialect d : kAllDialects) {
        if (to_string(d) == s) return d;
    }
    throw ValidationError("unknown dialect '" + std::string(s) + "'");
}

Split parse_split(std::string_view s) {
    for (Split sp : kAllSplits) {
        if (to_string(sp) == s) return sp;
    }
    throw ValidationError("unknown split '" + std::string(s) + "'");
}

Speaker parse_speaker(std::string_view s) {
    if (s == "describer") return Speaker::describer;
    if (s == "guesser") return Speaker::guesser;
    throw ValidationError("unknown speaker '" + std::string(s) + "'");
}

bool contains_target(std::string_view text, std::string_view target) {
    const std::string hay = text::collapse_whitespace(text::ascii_lower(text));
    const std::string needle = text::normalize_target(target);
    if (needle.empty()) return false;
    std::size_t pos = hay.find(needle);
    while (pos != std::string::npos) {
        const bool left_ok = pos == 0 || !std::isalnum(static_cast<unsigned char>(hay[pos - 1]));
        if (left_ok) return true;
        pos = hay.find(needle, pos + 1);
    }
    return false;
}

std::optional<std::size_t> find_answer_turn(const Conversation& conv) {
    for (std::size_t i = 0; i < conv.turns.size(); ++i) {
        const Turn& t = conv.turns[i];
        if (t.speaker == Speaker::guesser && contains_target(t.text, conv.target_word)) return i;
    }
    return std::nullopt;
}

bool is_maskable(const Conversation& conv) {
    return !conv.turns.empty() && find_answer_turn(conv).has_value();
}

void validate(const Conversation& conv) {
    if (conv.id.empty()) throw ValidationError("conversation with empty id");
    if (text::trim(conv.target_word).empty()) {
        throw ValidationError("conversation " + conv.id + ": empty target_word");
    }
    if (conv.turns.empty()) throw ValidationError("conversation " + conv.id + ": no turns");
    if (!find_answer_turn(conv)) {
        throw ValidationError("conversation " + conv.id + ": target word '" + conv.target_word +
                              "' never appears in a guesser turn");
    }
}

void validate(const MaskedExample& ex) {
    const std::string where = "masked example " + ex.source_id;
    if (text::trim(ex.target_word).empty()) throw ValidationError(where + ": empty target_word");
    if (ex.masked_turns.empty()) throw ValidationError(where + ": no turns");
    const Turn& last = ex.masked_turns.back();
    if (last.speaker != Speaker::guesser || last.text != kMaskToken) {
        throw ValidationError(where + ": final turn must be (guesser, \"[MASK]\")");
    }
    std::size_t masks = 0;
    for (std::size_t i = 0; i < ex.masked_turns.size(); ++i) {
        const std::string& t = ex.masked_turns[i].text;
        for (std::size_t p = t.find(kMaskToken); p != std::string::npos; p = t.find(kMaskToken, p + 1)) {
            ++masks;
        }
        if (i + 1 < ex.masked_turns.size() && contains_target(t, ex.target_word)) {
            throw ValidationError(where + ": target word leaks into turn " + std::to_string(i));
        }
    }
    if (masks != 1) throw ValidationError(where + ": [MASK] must occur exactly once");
}

}  // namespace lordd::corpus
