#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lordd::text {

std::string ascii_lower(std::string_view s);
std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

// Case-fold, trim, collapse internal whitespace. Used for target-word
// identity (masking, pair labels); punctuation is kept.
std::string normalize_target(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

// Git-style content digest: SHA-1 over "blob <size>\0" + content, hex.
std::string git_blob_digest(std::string_view content);

}  // namespace lordd::text
