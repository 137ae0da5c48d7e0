#include "lordd/corpus/prompt.hpp"

#include <fstream>
#include <sstream>

#include "lordd/error.hpp"

namespace lordd::corpus {

PromptTemplate PromptTemplate::default_template() {
    return {"v1", "Guess the hidden word.\n{turns}\nAnswer: "};
}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open prompt template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return {path.stem().string(), ss.str()};
}

std::string render_turns(std::span<const Turn> turns) {
    std::string out;
    for (std::size_t i = 0; i < turns.size(); ++i) {
        if (i > 0) out += '\n';
        out += turns[i].speaker == Speaker::describer ? "Describer: " : "Guesser: ";
        out += turns[i].text;
    }
    return out;
}

std::string render_prompt(const MaskedExample& ex, const PromptTemplate& tmpl) {
    const std::size_t pos = tmpl.text.find(kTurnsPlaceholder);
    if (pos == std::string::npos) {
        throw TemplateError("prompt template " + tmpl.version + " lacks the {turns} placeholder");
    }
    if (tmpl.text.find(kMaskToken) != std::string::npos) {
        throw TemplateError("prompt template " + tmpl.version + " must not contain [MASK]");
    }
    std::string out = tmpl.text;
    out.replace(pos, kTurnsPlaceholder.size(), render_turns(ex.masked_turns));
    return out;
}

}  // namespace lordd::corpus
