#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qctc/forge/dependency.hpp"

namespace qctc::forge {

struct QaPair {
  std::string question;
  std::string answer;
};

// Keep flags: a question stays if any normalized answer token is an OCR token.
std::vector<bool> filter_questions(const std::vector<QaPair>& qa, const std::set<std::string>& ocr);

// Ordered keyword phrase -> replacement rules. A phrase fires when its tokens
// occur contiguously in the normalized question.
struct PhraseRule {
  std::vector<std::string> phrase;
  bool anchored = false;  // phrase must open the question ("^" prefix in files)
  std::string value;
};

class PhraseTable {
 public:
  PhraseTable() = default;
  explicit PhraseTable(std::vector<PhraseRule> rules) : rules_(std::move(rules)) {}

  // Lines of "value<TAB>phrase"; '#' starts a comment line.
  static PhraseTable parse(std::string_view text);
  std::string to_text() const;

  // Value of the first rule that fires on the tokens, or nullptr.
  const std::string* match(const std::vector<std::string>& normalized) const;

  const std::vector<PhraseRule>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }

 private:
  std::vector<PhraseRule> rules_;
};

const PhraseTable& default_templates();
// Eleven labels, `name` first and `other` as the fallback.
const PhraseTable& default_question_types();

// Function words never treated as leaked answer text.
bool is_stopword(std::string_view normalized);

// Non-stopword tokens of the given answers.
std::set<std::string> answer_tokens(const std::vector<std::string>& answers);

struct CleanedQuestion {
  std::string text;
  DependencyTree tree;  // parse of `text`
  enum class Step { kUnchanged, kLeakRemoved, kTemplate, kBackbone } last_step = Step::kUnchanged;
};

// Removes leaked answer tokens (by branch pruning), then applies the first
// template whose keyword fires, otherwise strips nominal modifiers (prep,
// appos, relcl, acl hanging off anything but the main verb, except "of"
// phrases) that hold neither the wh-word nor the main verb.
CleanedQuestion clean_question(const DependencyTree& question, const std::set<std::string>& leaked,
                               const PhraseTable& templates = default_templates());

std::string classify_question_type(std::string_view question,
                                   const PhraseTable& types = default_question_types());

}  // namespace qctc::forge
