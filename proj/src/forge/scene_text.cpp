#include "qctc/forge/scene_text.hpp"

#include <stdexcept>

#include "qctc/text/normalize.hpp"

namespace qctc::forge {

namespace {

bool is_argument(const std::string& rel) {
  static const std::set<std::string> rels = {"obj",  "dobj",  "iobj",  "pobj", "attr",
                                             "oprd", "ccomp", "xcomp", "pcomp"};
  return rels.count(rel) != 0;
}

// Members of the coordination a "cc" token belongs to.
std::vector<std::size_t> coordination(const DependencyTree& tree, std::size_t cc) {
  std::size_t first = tree.parent(cc);
  if (first == DependencyTree::kNone) return {};
  if (tree.token(first).rel == "conj" && tree.parent(first) != DependencyTree::kNone)
    first = tree.parent(first);
  std::vector<std::size_t> members{first};
  for (std::size_t c : tree.children(first))
    if (tree.token(c).rel == "conj") members.push_back(c);
  return members;
}

}  // namespace

std::set<std::string> token_set(const std::vector<std::string>& strings) {
  std::set<std::string> out;
  for (const auto& s : strings)
    for (auto& t : text::tokenize(s)) out.insert(std::move(t));
  return out;
}

std::vector<Span> detect_scene_text(const std::vector<std::string>& tokens,
                                    const std::set<std::string>& ocr,
                                    const std::vector<Span>& entities) {
  std::vector<bool> hit(tokens.size(), false);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string t = text::normalize_token(tokens[i]);
    if (!t.empty() && ocr.count(t)) hit[i] = true;
  }
  for (const Span& e : entities)
    for (std::size_t i = e.begin; i < e.end && i < tokens.size(); ++i) hit[i] = true;

  std::vector<Span> spans;
  for (std::size_t i = 0; i < tokens.size();) {
    if (!hit[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < tokens.size() && hit[j]) ++j;
    spans.push_back({i, j});
    i = j;
  }
  return spans;
}

PruneResult prune_scene_text(const DependencyTree& tree, const std::vector<Span>& spans) {
  const std::size_t n = tree.size();
  PruneResult r;
  r.keep.assign(n, true);
  std::vector<bool> marked(n, false);
  for (const Span& s : spans) {
    if (s.begin > s.end || s.end > n) throw std::invalid_argument("scene-text span outside the sentence");
    for (std::size_t i = s.begin; i < s.end; ++i) marked[i] = true;
  }
  if (n > 0 && marked[tree.root()]) {
    r.reason = "scene text covers the root";
    return r;
  }

  auto has_marked = [&](std::size_t node) {
    for (std::size_t i : tree.subtree(node))
      if (marked[i]) return true;
    return false;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (!marked[i] || !r.keep[i]) continue;
    const std::size_t p = tree.parent(i);
    if (p != DependencyTree::kNone && marked[p]) continue;  // not a span head
    std::size_t cut = i;
    while (is_argument(tree.token(cut).rel) && tree.parent(cut) != tree.root()) cut = tree.parent(cut);

    std::vector<std::size_t> stack{cut};
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      r.keep[cur] = false;
      for (std::size_t c : tree.children(cur)) {
        if (tree.token(c).rel == "conj" && !has_marked(c)) continue;
        stack.push_back(c);
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!r.keep[i] || tree.token(i).rel != "cc") continue;
    std::size_t alive = 0;
    for (std::size_t m : coordination(tree, i))
      if (r.keep[m]) ++alive;
    if (alive < 2) r.keep[i] = false;
  }

  std::vector<std::string> kept;
  for (std::size_t i = 0; i < n; ++i)
    if (r.keep[i]) kept.push_back(tree.token(i).form);
  if (kept.empty()) {
    r.reason = "pruning removed every token";
    return r;
  }
  r.text = text::join(kept);
  r.valid = true;
  return r;
}

}  // namespace qctc::forge
