#include "qctc/model/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "qctc/text/normalize.hpp"

namespace qctc {

namespace {

const std::vector<std::string>& reserved_tokens() {
  static const std::vector<std::string> r = {"<pad>", "<unk>", "<bos>", "<eos>", "<sep>"};
  return r;
}

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(reserved_tokens()) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < kReserved) throw std::invalid_argument("vocabulary lacks the reserved ids");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second)
      throw std::invalid_argument("duplicate vocabulary token: " + tokens_[i]);
  }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary " + path.string());
  for (const auto& t : tokens_) out << t << '\n';
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, std::size_t min_count) {
  std::vector<std::string> order;
  std::map<std::string, std::size_t> counts;
  for (const auto& s : texts) {
    for (auto& t : text::tokenize(s)) {
      if (counts[t]++ == 0) order.push_back(t);
    }
  }
  std::vector<std::string> tokens = reserved_tokens();
  for (const auto& t : order) {
    if (counts[t] < min_count) continue;
    if (std::find(tokens.begin(), tokens.begin() + kReserved, t) != tokens.begin() + kReserved) continue;
    tokens.push_back(t);
  }
  return Vocabulary(std::move(tokens));
}

std::size_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(std::size_t id) const {
  if (id >= tokens_.size()) throw std::out_of_range("vocabulary id out of range");
  return tokens_[id];
}

std::vector<std::size_t> Vocabulary::encode(const std::string& sentence) const {
  std::vector<std::size_t> ids;
  for (const auto& t : text::tokenize(sentence)) ids.push_back(id(t));
  return ids;
}

}  // namespace qctc
