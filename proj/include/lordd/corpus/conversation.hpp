#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lordd::corpus {

enum class Dialect { en_US, en_IN, en_NG, IN_MV, NG_MV, IN_TR };
enum class Split { train, valid, test };
enum class Speaker { describer, guesser };

std::string_view to_string(Dialect d);
std::string_view to_string(Split s);
std::string_view to_string(Speaker s);

Dialect parse_dialect(std::string_view s);
Split parse_split(std::string_view s);
Speaker parse_speaker(std::string_view s);

inline constexpr Dialect kAllDialects[] = {Dialect::en_US, Dialect::en_IN, Dialect::en_NG,
                                           Dialect::IN_MV, Dialect::NG_MV, Dialect::IN_TR};
inline constexpr Split kAllSplits[] = {Split::train, Split::valid, Split::test};

inline constexpr std::string_view kMaskToken = "[MASK]";

struct Turn {
    Speaker speaker = Speaker::describer;
    std::string text;

    bool operator==(const Turn&) const = default;
};

// One game transcript as ingested from conversations.jsonl.
struct Conversation {
    std::string id;
    Dialect dialect = Dialect::en_US;
    std::string target_word;
    std::vector<Turn> turns;
    Split split = Split::train;

    bool operator==(const Conversation&) const = default;
};

// A conversation cut at the guesser's first correct utterance, which is
// replaced by the mask token.
struct MaskedExample {
    std::string source_id;
    Dialect dialect = Dialect::en_US;
    Split split = Split::train;
    std::string target_word;
    std::vector<Turn> masked_turns;

    bool operator==(const MaskedExample&) const = default;
};

// Cross-dialect pair of masked examples; label is +1 when both describe the
// same target word, -1 otherwise. us_id names the frozen side.
struct ContrastivePair {
    std::string us_id;
    std::string x_id;
    int label = -1;

    bool operator==(const ContrastivePair&) const = default;
};

// True when `text` contains `target` case-insensitively, with the match
// starting on a word boundary. The right edge is left open so inflected
// guesses ("planets" for "planet") count.
bool contains_target(std::string_view text, std::string_view target);

// Index of the first guesser turn containing the target, if any.
std::optional<std::size_t> find_answer_turn(const Conversation& conv);

bool is_maskable(const Conversation& conv);

// Throws ValidationError naming the conversation id.
void validate(const Conversation& conv);
void validate(const MaskedExample& ex);

}  // namespace lordd::corpus
