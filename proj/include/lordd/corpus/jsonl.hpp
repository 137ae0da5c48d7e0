#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lordd/corpus/conversation.hpp"

namespace lordd::corpus {

// A record that parsed but failed a semantic check.
struct Rejected {
    std::size_t line = 0;
    std::string id;
    std::string reason;
};

struct LoadReport {
    std::vector<Conversation> conversations;
    std::vector<Rejected> unmaskable;
};

// Strict loader: every record must parse and satisfy the Conversation
// invariants. Throws IoError / ParseError (with line number) / ValidationError (with id).
std::vector<Conversation> load_conversations(const std::filesystem::path& path);

// Like load_conversations, but unmaskable records are set aside instead of
// failing the whole file. Schema errors still throw.
LoadReport load_conversations_lenient(const std::filesystem::path& path);

void write_conversations(const std::filesystem::path& path, const std::vector<Conversation>& convs);
void write_conversations(std::ostream& os, const std::vector<Conversation>& convs);

std::vector<MaskedExample> load_masked(const std::filesystem::path& path);
void write_masked(const std::filesystem::path& path, const std::vector<MaskedExample>& examples);

std::vector<ContrastivePair> load_pairs(const std::filesystem::path& path);
void write_pairs(const std::filesystem::path& path, const std::vector<ContrastivePair>& pairs);

}  // namespace lordd::corpus
