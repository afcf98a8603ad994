#include "qctc/forge/dependency.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qctc/text/normalize.hpp"

namespace qctc::forge {

DependencyTree::DependencyTree(std::vector<DepToken> tokens) : tokens_(std::move(tokens)) {
  const std::size_t n = tokens_.size();
  children_.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t h = tokens_[i].head;
    if (h > n) throw std::invalid_argument("dependency head " + std::to_string(h) + " out of range");
    if (h == 0) {
      if (root_ != kNone) throw std::invalid_argument("dependency tree has more than one root");
      root_ = i;
    } else {
      if (h - 1 == i) throw std::invalid_argument("token is its own head");
      children_[h - 1].push_back(i);
    }
  }
  if (n > 0 && root_ == kNone) throw std::invalid_argument("dependency tree has no root");
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cur = i, steps = 0;
    while (tokens_[cur].head != 0) {
      cur = tokens_[cur].head - 1;
      if (++steps > n) throw std::invalid_argument("dependency heads contain a cycle");
    }
  }
}

std::size_t DependencyTree::parent(std::size_t i) const {
  const std::size_t h = tokens_.at(i).head;
  return h == 0 ? kNone : h - 1;
}

bool DependencyTree::dominates(std::size_t ancestor, std::size_t node) const {
  for (std::size_t cur = node; cur != kNone; cur = parent(cur))
    if (cur == ancestor) return true;
  return false;
}

std::vector<std::size_t> DependencyTree::subtree(std::size_t i) const {
  std::vector<std::size_t> out, stack{i};
  while (!stack.empty()) {
    const std::size_t cur = stack.back();
    stack.pop_back();
    out.push_back(cur);
    for (std::size_t c : children_.at(cur)) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> DependencyTree::forms() const {
  std::vector<std::string> out;
  out.reserve(tokens_.size());
  for (const auto& t : tokens_) out.push_back(t.form);
  return out;
}

DependencyTree DependencyTree::restricted(const std::vector<bool>& keep) const {
  if (keep.size() != size()) throw std::invalid_argument("keep mask has the wrong length");
  std::vector<std::size_t> new_index(size(), kNone);
  std::size_t count = 0;
  for (std::size_t i = 0; i < size(); ++i)
    if (keep[i]) new_index[i] = count++;

  std::vector<DepToken> out;
  out.reserve(count);
  std::size_t orphan_root = kNone;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!keep[i]) continue;
    DepToken t = tokens_[i];
    std::size_t anc = parent(i);
    while (anc != kNone && !keep[anc]) anc = parent(anc);
    if (anc != kNone) {
      t.head = new_index[anc] + 1;
    } else if (orphan_root == kNone) {
      orphan_root = new_index[i];
      t.head = 0;
      t.rel = "root";
    } else {
      t.head = orphan_root + 1;
      t.rel = "dep";
    }
    out.push_back(std::move(t));
  }
  return DependencyTree(std::move(out));
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::size_t parse_index(const std::string& s, std::size_t line_no) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw std::invalid_argument("CoNLL-U line " + std::to_string(line_no) + ": bad index '" + s + "'");
  return std::stoul(s);
}

}  // namespace

std::vector<ConlluSentence> parse_conllu(std::string_view text) {
  std::vector<ConlluSentence> out;
  std::istringstream in{std::string(text)};
  std::string line, id;
  std::vector<DepToken> tokens;
  std::size_t line_no = 0, sentence_start = 0;

  auto flush = [&] {
    if (tokens.empty()) {
      id.clear();
      return;
    }
    try {
      out.push_back({id, DependencyTree(std::move(tokens))});
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("CoNLL-U sentence at line " + std::to_string(sentence_start) +
                                  ": " + e.what());
    }
    tokens.clear();
    id.clear();
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const std::string key = "# sent_id =";
      if (line.rfind(key, 0) == 0) {
        std::string value = line.substr(key.size());
        value.erase(0, value.find_first_not_of(' '));
        value.erase(value.find_last_not_of(' ') + 1);
        id = value;
      }
      continue;
    }
    const auto fields = split_tabs(line);
    if (fields.size() != 10)
      throw std::invalid_argument("CoNLL-U line " + std::to_string(line_no) + ": expected 10 fields, got " +
                                  std::to_string(fields.size()));
    if (fields[0].find_first_of("-.") != std::string::npos) continue;
    if (tokens.empty()) sentence_start = line_no;
    const std::size_t index = parse_index(fields[0], line_no);
    if (index != tokens.size() + 1)
      throw std::invalid_argument("CoNLL-U line " + std::to_string(line_no) + ": token ids must run 1, 2, ...");
    tokens.push_back({fields[1], parse_index(fields[6], line_no), fields[7]});
  }
  flush();
  return out;
}

std::string to_conllu(const DependencyTree& tree, std::string_view sent_id) {
  std::ostringstream out;
  if (!sent_id.empty()) out << "# sent_id = " << sent_id << "\n";
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const DepToken& t = tree.token(i);
    out << i + 1 << '\t' << t.form << "\t_\t_\t_\t_\t" << t.head << '\t' << t.rel << "\t_\t_\n";
  }
  out << "\n";
  return out.str();
}

namespace {

const std::set<std::string>& determiners() {
  static const std::set<std::string> words = {
      "a",   "an",   "the",  "this", "that", "these", "those", "my",    "your",
      "his", "her",  "its",  "our",  "their", "some", "any",   "each",  "every",
      "no",  "another"};
  return words;
}

const std::set<std::string>& adjectives() {
  static const std::set<std::string> words = {
      "big",   "small", "large",  "little", "tall",  "short", "long",   "old",   "new",
      "red",   "blue",  "green",  "yellow", "white", "black", "brown",  "orange", "pink",
      "purple", "gray", "grey",   "silver", "gold",  "dark",  "bright", "empty", "full",
      "open",  "closed", "wooden", "metal", "plastic", "glass", "young", "many",  "several"};
  return words;
}

}  // namespace

DependencyTree fallback_parse(const std::vector<std::string>& tokens) {
  const std::size_t n = tokens.size();
  std::vector<DepToken> out(n);
  std::vector<bool> modifier(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].form = tokens[i];
    const std::string w = text::normalize_token(tokens[i]);
    if (determiners().count(w)) {
      modifier[i] = true;
      out[i].rel = "det";
    } else if (adjectives().count(w)) {
      modifier[i] = true;
      out[i].rel = "amod";
    }
  }
  std::size_t root = DependencyTree::kNone;
  for (std::size_t i = 0; i < n && root == DependencyTree::kNone; ++i)
    if (!modifier[i]) root = i;
  if (root == DependencyTree::kNone) root = 0;

  for (std::size_t i = 0; i < n; ++i) {
    if (i == root) {
      out[i].head = 0;
      out[i].rel = "root";
      continue;
    }
    if (modifier[i]) {
      std::size_t j = i + 1;
      while (j < n && modifier[j]) ++j;
      if (j < n) {
        out[i].head = j + 1;
        continue;
      }
    }
    out[i].head = root + 1;
    out[i].rel = "dep";
  }
  return DependencyTree(std::move(out));
}

}  // namespace qctc::forge
