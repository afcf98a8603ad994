#include "qctc/forge/questions.hpp"

#include <sstream>
#include <stdexcept>

#include "qctc/forge/scene_text.hpp"
#include "qctc/text/normalize.hpp"

namespace qctc::forge {

namespace {

constexpr const char* kDefaultTemplates =
    "what is the title of the book\twhat book\n"
    "what is the author of the book\twho wrote the book\n"
    "what is the author of the book\twhat author\n";

constexpr const char* kDefaultTypes =
    "name\tname\n"
    "name\tnamed\n"
    "name\tcalled\n"
    "title\ttitle\n"
    "author\tauthor\n"
    "author\twho wrote\n"
    "author\twritten by\n"
    "brand\tbrand\n"
    "brand\twhat company\n"
    "number\thow many\n"
    "number\twhat number\n"
    "number\tnumber\n"
    "price\thow much\n"
    "price\tprice\n"
    "price\tcost\n"
    "time\twhat time\n"
    "time\t^when\n"
    "date\tyear\n"
    "date\tdate\n"
    "date\twhat day\n"
    "location\t^where\n"
    "location\twhat city\n"
    "location\twhat street\n"
    "location\taddress\n"
    "word\tsay\n"
    "word\tsays\n"
    "word\twritten\n"
    "word\tword\n"
    "word\twords\n"
    "word\tread\n"
    "word\ttext\n";

const std::set<std::string>& wh_words() {
  static const std::set<std::string> words = {"what", "which", "who",  "whom", "whose",
                                              "where", "when", "why", "how"};
  return words;
}

std::vector<std::string> normalized(const std::vector<std::string>& forms) {
  std::vector<std::string> out;
  out.reserve(forms.size());
  for (const auto& f : forms) out.push_back(text::normalize_token(f));
  return out;
}

std::string joined(const DependencyTree& tree) { return text::join(tree.forms()); }

bool of_phrase(const DependencyTree& tree, std::size_t node) {
  if (text::normalize_token(tree.token(node).form) == "of") return true;
  for (std::size_t c : tree.children(node))
    if (tree.token(c).rel == "case" && text::normalize_token(tree.token(c).form) == "of") return true;
  return false;
}

DependencyTree backbone(const DependencyTree& tree) {
  static const std::set<std::string> modifiers = {"prep", "appos", "relcl", "acl", "nmod"};
  const auto norm = normalized(tree.forms());
  std::size_t wh = DependencyTree::kNone;
  for (std::size_t i = 0; i < norm.size() && wh == DependencyTree::kNone; ++i)
    if (wh_words().count(norm[i])) wh = i;

  std::vector<bool> keep(tree.size(), true);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (!keep[i] || !modifiers.count(tree.token(i).rel)) continue;
    const std::size_t p = tree.parent(i);
    if (p == DependencyTree::kNone || p == tree.root() || of_phrase(tree, i)) continue;
    if (wh != DependencyTree::kNone && tree.dominates(i, wh)) continue;
    for (std::size_t j : tree.subtree(i)) keep[j] = false;
  }
  bool any = false;
  for (bool k : keep) any = any || k;
  if (!any) return tree;
  return tree.restricted(keep);
}

}  // namespace

std::vector<bool> filter_questions(const std::vector<QaPair>& qa, const std::set<std::string>& ocr) {
  std::vector<bool> keep(qa.size(), false);
  for (std::size_t i = 0; i < qa.size(); ++i)
    for (const auto& t : text::tokenize(qa[i].answer))
      if (ocr.count(t)) {
        keep[i] = true;
        break;
      }
  return keep;
}

PhraseTable PhraseTable::parse(std::string_view text) {
  std::vector<PhraseRule> rules;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw std::invalid_argument("rule line " + std::to_string(line_no) + ": expected value<TAB>phrase");
    PhraseRule r;
    r.value = line.substr(0, tab);
    std::string phrase = line.substr(tab + 1);
    if (!phrase.empty() && phrase[0] == '^') {
      r.anchored = true;
      phrase.erase(0, 1);
    }
    r.phrase = text::tokenize(phrase);
    if (r.phrase.empty()) throw std::invalid_argument("rule line " + std::to_string(line_no) + ": empty phrase");
    rules.push_back(std::move(r));
  }
  return PhraseTable(std::move(rules));
}

std::string PhraseTable::to_text() const {
  std::string out;
  for (const auto& r : rules_) out += r.value + "\t" + (r.anchored ? "^" : "") + text::join(r.phrase) + "\n";
  return out;
}

const std::string* PhraseTable::match(const std::vector<std::string>& norm) const {
  for (const auto& r : rules_) {
    const std::size_t k = r.phrase.size();
    if (k > norm.size()) continue;
    const std::size_t last = r.anchored ? 0 : norm.size() - k;
    for (std::size_t s = 0; s <= last; ++s)
      if (std::equal(r.phrase.begin(), r.phrase.end(), norm.begin() + static_cast<std::ptrdiff_t>(s)))
        return &r.value;
  }
  return nullptr;
}

const PhraseTable& default_templates() {
  static const PhraseTable t = PhraseTable::parse(kDefaultTemplates);
  return t;
}

const PhraseTable& default_question_types() {
  static const PhraseTable t = PhraseTable::parse(kDefaultTypes);
  return t;
}

bool is_stopword(std::string_view w) {
  static const std::set<std::string, std::less<>> words = {
      "a",     "an",    "the",  "of",   "on",   "in",   "at",   "to",    "for",   "by",
      "with",  "from",  "and",  "or",   "is",   "are",  "was",  "were",  "be",    "it",
      "its",   "this",  "that", "these", "those", "what", "which", "who", "whom", "whose",
      "where", "when",  "why",  "how",  "does", "do",   "did",  "has",   "have",  "s"};
  return words.count(w) != 0;
}

std::set<std::string> answer_tokens(const std::vector<std::string>& answers) {
  std::set<std::string> out;
  for (const auto& a : answers)
    for (auto& t : text::tokenize(a))
      if (!is_stopword(t)) out.insert(std::move(t));
  return out;
}

CleanedQuestion clean_question(const DependencyTree& question, const std::set<std::string>& leaked,
                               const PhraseTable& templates) {
  CleanedQuestion out;
  DependencyTree tree = question;
  const auto spans = detect_scene_text(question.forms(), leaked);
  if (!spans.empty()) {
    const PruneResult pr = prune_scene_text(question, spans);
    std::vector<bool> keep = pr.keep;
    if (!pr.valid) {
      keep.assign(question.size(), true);
      for (const Span& s : spans)
        for (std::size_t i = s.begin; i < s.end; ++i) keep[i] = false;
    }
    bool any = false;
    for (bool k : keep) any = any || k;
    if (any) {
      tree = question.restricted(keep);
      out.last_step = CleanedQuestion::Step::kLeakRemoved;
    }
  }

  if (const std::string* t = templates.match(normalized(tree.forms()))) {
    out.text = *t;
    out.tree = fallback_parse(text::split_whitespace(*t));
    out.last_step = CleanedQuestion::Step::kTemplate;
    return out;
  }

  DependencyTree core = backbone(tree);
  if (core.size() != tree.size()) {
    tree = std::move(core);
    out.last_step = CleanedQuestion::Step::kBackbone;
  }
  out.text = joined(tree);
  out.tree = std::move(tree);
  return out;
}

std::string classify_question_type(std::string_view question, const PhraseTable& types) {
  const std::string* label = types.match(text::tokenize(question));
  return label ? *label : "other";
}

}  // namespace qctc::forge
