#include "lordd/corpus/jsonl.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "lordd/error.hpp"

namespace lordd::corpus {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

// Calls fn(line_number, record) for every non-blank line.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(std::size_t, const json&)>& fn) {
    std::ifstream in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!rec.is_object()) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": record is not an object");
        }
        fn(lineno, rec);
    }
}

std::string field_string(const json& rec, const char* key, const std::filesystem::path& path,
                         std::size_t lineno) {
    const auto it = rec.find(key);
    if (it == rec.end() || !it->is_string()) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": missing string field '" +
                         key + "'");
    }
    return it->get<std::string>();
}

std::vector<Turn> parse_turns(const json& rec, const std::filesystem::path& path, std::size_t lineno) {
    const auto it = rec.find("turns");
    if (it == rec.end() || !it->is_array()) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) + ": missing array field 'turns'");
    }
    std::vector<Turn> turns;
    for (const json& t : *it) {
        if (!t.is_object()) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": turn is not an object");
        }
        Turn turn;
        turn.speaker = parse_speaker(field_string(t, "speaker", path, lineno));
        turn.text = field_string(t, "text", path, lineno);
        turns.push_back(std::move(turn));
    }
    return turns;
}

// Schema-level parse; enum violations are reported as validation errors
// naming the record id.
Conversation parse_conversation(const json& rec, const std::filesystem::path& path, std::size_t lineno) {
    Conversation c;
    c.id = field_string(rec, "id", path, lineno);
    try {
        c.dialect = parse_dialect(field_string(rec, "dialect", path, lineno));
        c.split = parse_split(field_string(rec, "split", path, lineno));
        c.target_word = field_string(rec, "target_word", path, lineno);
        c.turns = parse_turns(rec, path, lineno);
    } catch (const ValidationError& e) {
        throw ValidationError("conversation " + c.id + ": " + e.what());
    }
    return c;
}

json turns_json(const std::vector<Turn>& turns) {
    json arr = json::array();
    for (const Turn& t : turns) {
        arr.push_back(json{{"speaker", std::string(to_string(t.speaker))}, {"text", t.text}});
    }
    return arr;
}

json conversation_json(const Conversation& c) {
    json j;
    j["id"] = c.id;
    j["dialect"] = std::string(to_string(c.dialect));
    j["target_word"] = c.target_word;
    j["split"] = std::string(to_string(c.split));
    j["turns"] = turns_json(c.turns);
    return j;
}

}  // namespace

std::vector<Conversation> load_conversations(const std::filesystem::path& path) {
    std::vector<Conversation> out;
    for_each_record(path, [&](std::size_t lineno, const json& rec) {
        Conversation c = parse_conversation(rec, path, lineno);
        validate(c);
        out.push_back(std::move(c));
    });
    return out;
}

LoadReport load_conversations_lenient(const std::filesystem::path& path) {
    LoadReport report;
    for_each_record(path, [&](std::size_t lineno, const json& rec) {
        Conversation c = parse_conversation(rec, path, lineno);
        try {
            validate(c);
        } catch (const ValidationError& e) {
            report.unmaskable.push_back({lineno, c.id, e.what()});
            return;
        }
        report.conversations.push_back(std::move(c));
    });
    return report;
}

void write_conversations(std::ostream& os, const std::vector<Conversation>& convs) {
    for (const Conversation& c : convs) os << conversation_json(c).dump() << '\n';
}

void write_conversations(const std::filesystem::path& path, const std::vector<Conversation>& convs) {
    std::ofstream out = open_output(path);
    write_conversations(out, convs);
}

std::vector<MaskedExample> load_masked(const std::filesystem::path& path) {
    std::vector<MaskedExample> out;
    for_each_record(path, [&](std::size_t lineno, const json& rec) {
        const auto masked = rec.find("masked");
        if (masked == rec.end() || !masked->is_boolean() || !masked->get<bool>()) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": 'masked' must be true");
        }
        Conversation c = parse_conversation(rec, path, lineno);
        MaskedExample ex{c.id, c.dialect, c.split, c.target_word, std::move(c.turns)};
        validate(ex);
        out.push_back(std::move(ex));
    });
    return out;
}

void write_masked(const std::filesystem::path& path, const std::vector<MaskedExample>& examples) {
    std::ofstream out = open_output(path);
    for (const MaskedExample& ex : examples) {
        json j;
        j["id"] = ex.source_id;
        j["dialect"] = std::string(to_string(ex.dialect));
        j["target_word"] = ex.target_word;
        j["split"] = std::string(to_string(ex.split));
        j["turns"] = turns_json(ex.masked_turns);
        j["masked"] = true;
        out << j.dump() << '\n';
    }
}

std::vector<ContrastivePair> load_pairs(const std::filesystem::path& path) {
    std::vector<ContrastivePair> out;
    for_each_record(path, [&](std::size_t lineno, const json& rec) {
        ContrastivePair p;
        p.us_id = field_string(rec, "a_id", path, lineno);
        p.x_id = field_string(rec, "b_id", path, lineno);
        const auto label = rec.find("label");
        if (label == rec.end() || !label->is_number_integer()) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": missing integer 'label'");
        }
        p.label = label->get<int>();
        if (p.label != 1 && p.label != -1) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": label must be 1 or -1");
        }
        out.push_back(std::move(p));
    });
    return out;
}

void write_pairs(const std::filesystem::path& path, const std::vector<ContrastivePair>& pairs) {
    std::ofstream out = open_output(path);
    for (const ContrastivePair& p : pairs) {
        out << json{{"a_id", p.us_id}, {"b_id", p.x_id}, {"label", p.label}}.dump() << '\n';
    }
}

}  // namespace lordd::corpus
