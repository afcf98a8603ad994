#include "qctc/forge/dataset.hpp"

#include <set>
#include <stdexcept>

#include "json.hpp"
#include "qctc/text/normalize.hpp"

namespace qctc::forge {

using nlohmann::json;

std::size_t DatasetRecord::kept_questions() const {
  std::size_t n = 0;
  for (const auto& q : questions) n += q.kept ? 1 : 0;
  return n;
}

namespace {

std::vector<OcrToken> ocr_from_json(const json& j) {
  std::vector<OcrToken> out;
  for (const auto& o : j) {
    OcrToken t;
    if (o.is_string()) {
      t.text = o.get<std::string>();
    } else {
      t.text = o.at("text").get<std::string>();
      if (o.contains("box")) {
        const auto& b = o.at("box");
        if (!b.is_array() || b.size() != 4) throw std::invalid_argument("OCR box needs four numbers");
        for (std::size_t k = 0; k < 4; ++k) t.box[k] = b[k].get<double>();
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

json ocr_to_json(const std::vector<OcrToken>& ocr) {
  json out = json::array();
  for (const auto& t : ocr) out.push_back({{"text", t.text}, {"box", t.box}});
  return out;
}

Span span_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("span must be [begin, end]");
  Span s{j[0].get<std::size_t>(), j[1].get<std::size_t>()};
  if (s.begin > s.end) throw std::invalid_argument("span begins after it ends");
  return s;
}

// Every occurrence of the entity's token sequence in the caption.
void locate(const std::vector<std::string>& caption_norm, const std::string& entity, std::vector<Span>& out) {
  const auto needle = text::tokenize(entity);
  if (needle.empty() || needle.size() > caption_norm.size()) return;
  for (std::size_t s = 0; s + needle.size() <= caption_norm.size(); ++s)
    if (std::equal(needle.begin(), needle.end(), caption_norm.begin() + static_cast<std::ptrdiff_t>(s)))
      out.push_back({s, s + needle.size()});
}

std::vector<std::string> normalized(const std::vector<std::string>& forms) {
  std::vector<std::string> out;
  for (const auto& f : forms) out.push_back(text::normalize_token(f));
  return out;
}

ForgeOutcome reject(std::string reason) {
  ForgeOutcome o;
  o.reason = std::move(reason);
  return o;
}

bool contains_any(const std::string& sentence, const std::set<std::string>& words) {
  for (const auto& t : text::tokenize(sentence))
    if (words.count(t)) return true;
  return false;
}

}  // namespace

RawRecord parse_raw_record(std::string_view json_line) {
  const json j = json::parse(json_line);
  RawRecord r;
  r.id = j.at("id").get<std::string>();
  r.image_id = j.value("image_id", r.id);
  r.caption = j.at("caption").get<std::string>();
  r.auto_initial = j.value("auto_initial", std::string());
  if (j.contains("ocr")) r.ocr = ocr_from_json(j.at("ocr"));
  if (j.contains("entities"))
    for (const auto& e : j.at("entities")) {
      if (e.is_string())
        r.entity_strings.push_back(e.get<std::string>());
      else
        r.entity_spans.push_back(span_from_json(e));
    }
  if (j.contains("qa"))
    for (const auto& q : j.at("qa"))
      r.qa.push_back({q.at("question").get<std::string>(), q.at("answer").get<std::string>()});
  return r;
}

std::vector<RawRecord> read_raw_records(std::istream& in) {
  std::vector<RawRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_raw_record(line));
    } catch (const std::exception& e) {
      throw std::invalid_argument("input line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

ParseIndex index_parses(const std::vector<ConlluSentence>& sentences) {
  ParseIndex out;
  for (const auto& s : sentences) {
    if (s.id.empty()) throw std::invalid_argument("CoNLL-U sentence without sent_id");
    if (!out.emplace(s.id, s.tree).second) throw std::invalid_argument("duplicate sent_id '" + s.id + "'");
  }
  return out;
}

ForgeOutcome forge_record(const RawRecord& raw, const ParseIndex& parses, const ForgeOptions& options) {
  const auto tokens = text::split_whitespace(raw.caption);
  if (text::tokenize(raw.caption).empty()) return reject("empty caption");
  if (text::tokenize(raw.auto_initial).empty()) return reject("missing automatic initial caption");

  DatasetRecord rec;
  rec.id = raw.id;
  rec.image_id = raw.image_id;
  rec.caption = text::join(tokens);
  rec.auto_initial = text::join(text::split_whitespace(raw.auto_initial));
  rec.ocr = raw.ocr;

  DependencyTree tree;
  if (auto it = parses.find(raw.id); it != parses.end()) {
    if (it->second.forms() != tokens) return reject("caption parse tokens differ from the caption");
    tree = it->second;
    rec.parse_ref = raw.id;
  } else {
    tree = fallback_parse(tokens);
  }

  rec.entities = raw.entity_spans;
  for (const Span& s : rec.entities)
    if (s.end > tokens.size()) return reject("entity span outside the caption");
  const auto caption_norm = normalized(tokens);
  for (const auto& e : raw.entity_strings) locate(caption_norm, e, rec.entities);

  std::vector<std::string> ocr_strings;
  for (const auto& o : raw.ocr) ocr_strings.push_back(o.text);
  const auto ocr = token_set(ocr_strings);

  const auto spans = detect_scene_text(tokens, ocr, rec.entities);
  if (spans.empty()) {
    rec.pseudo_initial = rec.caption;
  } else {
    const PruneResult pr = prune_scene_text(tree, spans);
    if (!pr.valid) return reject(pr.reason);
    rec.pseudo_initial = pr.text;
  }

  const auto keep = filter_questions(raw.qa, ocr);
  std::vector<std::string> answers;
  for (const auto& q : raw.qa) answers.push_back(q.answer);
  const auto leaked = answer_tokens(answers);

  for (std::size_t k = 0; k < raw.qa.size(); ++k) {
    QuestionRecord q;
    q.question = raw.qa[k].question;
    q.answer = raw.qa[k].answer;
    if (keep[k]) {
      const auto q_tokens = text::split_whitespace(q.question);
      DependencyTree q_tree;
      if (auto it = parses.find(raw.id + "/q" + std::to_string(k)); it != parses.end()) {
        if (it->second.forms() != q_tokens)
          return reject("question " + std::to_string(k) + " parse tokens differ from the question");
        q_tree = it->second;
      } else {
        q_tree = fallback_parse(q_tokens);
      }
      if (!q_tokens.empty()) {
        const CleanedQuestion c = clean_question(q_tree, leaked, *options.templates);
        q.cleaned = c.text;
        q.kept = !text::tokenize(c.text).empty() && !contains_any(c.text, leaked);
        if (q.kept) q.type = classify_question_type(c.text, *options.types);
      }
    }
    rec.questions.push_back(std::move(q));
  }
  if (rec.kept_questions() == 0) return reject("no question survives filtering and cleaning");

  ForgeOutcome out;
  out.accepted = true;
  out.record = std::move(rec);
  return out;
}

ForgeReport forge_dataset(const std::vector<RawRecord>& raw, const ParseIndex& parses,
                          const ForgeOptions& options) {
  std::vector<bool> duplicate(raw.size(), false);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < raw.size(); ++i) duplicate[i] = !seen.insert(raw[i].id).second;

  std::vector<ForgeOutcome> outcomes(raw.size());
  const auto n = static_cast<std::ptrdiff_t>(raw.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    outcomes[u] = duplicate[u] ? reject("duplicate id") : forge_record(raw[u], parses, options);
  }

  ForgeReport report;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (outcomes[i].accepted)
      report.records.push_back(std::move(outcomes[i].record));
    else
      report.rejected.push_back({raw[i].id, outcomes[i].reason});
  }
  return report;
}

void validate_record(const DatasetRecord& r) {
  if (r.id.empty()) throw std::invalid_argument("record without id");
  auto fail = [&](const std::string& what) { throw std::invalid_argument("record '" + r.id + "': " + what); };
  if (text::tokenize(r.caption).empty()) fail("empty caption");
  if (text::tokenize(r.pseudo_initial).empty()) fail("empty pseudo initial caption");
  if (text::tokenize(r.auto_initial).empty()) fail("empty automatic initial caption");
  if (r.kept_questions() == 0) fail("no kept question");

  std::vector<std::string> ocr_strings, answers;
  for (const auto& o : r.ocr) ocr_strings.push_back(o.text);
  for (const auto& q : r.questions) answers.push_back(q.answer);
  const auto ocr = token_set(ocr_strings);
  const auto leaked = answer_tokens(answers);
  for (const auto& q : r.questions) {
    if (!q.kept) continue;
    if (!contains_any(q.answer, ocr)) fail("answer '" + q.answer + "' shares no token with the OCR tokens");
    if (text::tokenize(q.cleaned).empty()) fail("kept question with empty cleaned text");
    if (contains_any(q.cleaned, leaked)) fail("cleaned question '" + q.cleaned + "' contains answer text");
  }
}

std::string to_json_line(const DatasetRecord& r) {
  validate_record(r);
  json qs = json::array();
  for (const auto& q : r.questions)
    qs.push_back({{"question", q.question},
                  {"answer", q.answer},
                  {"cleaned", q.cleaned},
                  {"type", q.type},
                  {"kept", q.kept}});
  json ents = json::array();
  for (const Span& s : r.entities) ents.push_back({s.begin, s.end});
  const json j = {{"id", r.id},
                  {"image_id", r.image_id},
                  {"caption", r.caption},
                  {"pseudo_initial", r.pseudo_initial},
                  {"auto_initial", r.auto_initial},
                  {"questions", qs},
                  {"ocr", ocr_to_json(r.ocr)},
                  {"entities", ents},
                  {"parse_ref", r.parse_ref}};
  return j.dump();
}

DatasetRecord record_from_json_line(std::string_view line) {
  const json j = json::parse(line);
  DatasetRecord r;
  r.id = j.at("id").get<std::string>();
  r.image_id = j.at("image_id").get<std::string>();
  r.caption = j.at("caption").get<std::string>();
  r.pseudo_initial = j.at("pseudo_initial").get<std::string>();
  r.auto_initial = j.at("auto_initial").get<std::string>();
  for (const auto& q : j.at("questions"))
    r.questions.push_back({q.at("question").get<std::string>(), q.at("answer").get<std::string>(),
                           q.value("cleaned", std::string()), q.value("type", std::string()),
                           q.value("kept", false)});
  r.ocr = ocr_from_json(j.at("ocr"));
  if (j.contains("entities"))
    for (const auto& e : j.at("entities")) r.entities.push_back(span_from_json(e));
  r.parse_ref = j.value("parse_ref", std::string());
  return r;
}

std::vector<DatasetRecord> read_dataset(std::istream& in) {
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json_line(line));
      validate_record(out.back());
    } catch (const std::exception& e) {
      throw std::invalid_argument("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qctc::forge
