#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qctc::forge {

struct DepToken {
  std::string form;
  std::size_t head = 0;  // 1-based head index, 0 for the root
  std::string rel;
};

// A validated dependency tree: exactly one root, heads in range, no cycles.
// Node indices in the accessors are 0-based.
class DependencyTree {
 public:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  DependencyTree() = default;
  explicit DependencyTree(std::vector<DepToken> tokens);

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const DepToken& token(std::size_t i) const { return tokens_.at(i); }
  const std::vector<DepToken>& tokens() const { return tokens_; }
  std::size_t root() const { return root_; }
  std::size_t parent(std::size_t i) const;  // kNone for the root
  const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }
  bool dominates(std::size_t ancestor, std::size_t node) const;
  // Node and all its descendants, ascending.
  std::vector<std::size_t> subtree(std::size_t i) const;
  std::vector<std::string> forms() const;

  // Tree over the kept nodes. Each kept node hangs from its nearest kept
  // ancestor; orphans attach to the first kept orphan, which becomes root.
  DependencyTree restricted(const std::vector<bool>& keep) const;

 private:
  std::vector<DepToken> tokens_;
  std::vector<std::vector<std::size_t>> children_;
  std::size_t root_ = kNone;
};

struct ConlluSentence {
  std::string id;  // from "# sent_id = ...", else empty
  DependencyTree tree;
};

// Reads ID, FORM, HEAD and DEPREL; multiword-token and empty-node lines are
// skipped. Throws std::invalid_argument naming the line on malformed input.
std::vector<ConlluSentence> parse_conllu(std::string_view text);
std::string to_conllu(const DependencyTree& tree, std::string_view sent_id = {});

// Rule-based stand-in parser. Determiners and listed adjectives attach to
// the next other token; everything else hangs flat from the first remaining
// token.
DependencyTree fallback_parse(const std::vector<std::string>& tokens);

}  // namespace qctc::forge
