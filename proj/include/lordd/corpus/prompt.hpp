#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "lordd/corpus/conversation.hpp"

namespace lordd::corpus {

inline constexpr std::string_view kTurnsPlaceholder = "{turns}";

struct PromptTemplate {
    std::string version;
    std::string text;

    // Built-in copy of assets/prompt_template_v1.txt.
    static PromptTemplate default_template();
    static PromptTemplate from_file(const std::filesystem::path& path);
};

// "Describer: ..." / "Guesser: ..." lines joined by newlines.
std::string render_turns(std::span<const Turn> turns);

// Substitutes the rendered turns into the template. Throws TemplateError if
// the placeholder is missing or the template itself carries a mask token.
std::string render_prompt(const MaskedExample& ex, const PromptTemplate& tmpl);

}  // namespace lordd::corpus
