#pragma once

#include <string>
#include <string_view>
#include <vector>

// Tokenization shared by dataset construction, target building and metrics:
// whitespace split, lowercase, leading/trailing punctuation stripped.
namespace qctc::text {

std::vector<std::string> split_whitespace(std::string_view s);

// Lowercases and strips leading/trailing ASCII punctuation. May return "".
std::string normalize_token(std::string_view token);

// Whitespace tokens, normalized, with empty results dropped.
std::vector<std::string> tokenize(std::string_view s);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

std::string to_lower(std::string_view s);

}  // namespace qctc::text
