#include "qctc/text/normalize.hpp"

#include <cctype>

namespace qctc::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string normalize_token(std::string_view token) {
  std::size_t b = 0, e = token.size();
  while (b < e && is_punct(token[b])) ++b;
  while (e > b && is_punct(token[e - 1])) --e;
  return to_lower(token.substr(b, e - b));
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& raw : split_whitespace(s)) {
    std::string t = normalize_token(raw);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

}  // namespace qctc::text
