#pragma once

#include <set>
#include <string>
#include <vector>

#include "qctc/forge/dependency.hpp"

namespace qctc::forge {

// Half-open token range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

// Normalized OCR vocabulary; multi-word OCR strings contribute each word.
std::set<std::string> token_set(const std::vector<std::string>& strings);

// A token is scene text if its normalized form is in `ocr` or it falls in
// one of `entities`. Adjacent scene-text tokens merge into one span.
std::vector<Span> detect_scene_text(const std::vector<std::string>& tokens,
                                    const std::set<std::string>& ocr,
                                    const std::vector<Span>& entities = {});

struct PruneResult {
  bool valid = false;
  std::string reason;       // set when invalid
  std::vector<bool> keep;   // per token
  std::string text;         // kept forms joined by single spaces
};

// Removes every span token together with the branch that carries it. From
// each span head the cut climbs through argument relations (objects,
// complements) towards the root and stops below the root or at the first
// modifier relation; that whole subtree goes, except conjuncts free of scene
// text. Coordinators left with fewer than two conjuncts are dropped.
PruneResult prune_scene_text(const DependencyTree& tree, const std::vector<Span>& spans);

}  // namespace qctc::forge
