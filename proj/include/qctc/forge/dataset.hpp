#pragma once

#include <array>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "qctc/forge/dependency.hpp"
#include "qctc/forge/questions.hpp"
#include "qctc/forge/scene_text.hpp"

namespace qctc::forge {

struct OcrToken {
  std::string text;
  std::array<double, 4> box{};  // x0, y0, x1, y1, normalized to the image
};

struct QuestionRecord {
  std::string question;
  std::string answer;
  std::string cleaned;
  std::string type;
  bool kept = false;
};

struct DatasetRecord {
  std::string id;
  std::string image_id;
  std::string caption;         // target Y
  std::string pseudo_initial;  // pruned caption
  std::string auto_initial;    // ingested
  std::vector<QuestionRecord> questions;
  std::vector<OcrToken> ocr;
  std::vector<Span> entities;  // over caption tokens
  std::string parse_ref;       // sent_id of the caption parse, "" for the fallback parser

  std::size_t kept_questions() const;
};

// One line of pipeline input. Entities may be given as [begin, end) token
// spans or as strings located in the caption.
struct RawRecord {
  std::string id;
  std::string image_id;
  std::string caption;
  std::string auto_initial;
  std::vector<OcrToken> ocr;
  std::vector<Span> entity_spans;
  std::vector<std::string> entity_strings;
  std::vector<QaPair> qa;
};

RawRecord parse_raw_record(std::string_view json_line);
// Blank lines skipped; errors carry the line number.
std::vector<RawRecord> read_raw_records(std::istream& in);

// Sidecar parses keyed by sent_id: "<id>" for the caption, "<id>/q<k>" for
// question k.
using ParseIndex = std::map<std::string, DependencyTree>;
ParseIndex index_parses(const std::vector<ConlluSentence>& sentences);

struct ForgeOptions {
  const PhraseTable* templates = &default_templates();
  const PhraseTable* types = &default_question_types();
};

struct ForgeOutcome {
  bool accepted = false;
  DatasetRecord record;
  std::string reason;  // set when rejected
};

ForgeOutcome forge_record(const RawRecord& raw, const ParseIndex& parses, const ForgeOptions& options = {});

struct Rejection {
  std::string id;
  std::string reason;
};

struct ForgeReport {
  std::vector<DatasetRecord> records;
  std::vector<Rejection> rejected;
};

// Records run in parallel; output keeps input order. Repeated ids after the
// first are rejected.
ForgeReport forge_dataset(const std::vector<RawRecord>& raw, const ParseIndex& parses,
                          const ForgeOptions& options = {});

// Throws std::invalid_argument naming the broken invariant.
void validate_record(const DatasetRecord& record);

// Validates before writing.
std::string to_json_line(const DatasetRecord& record);
DatasetRecord record_from_json_line(std::string_view line);
std::vector<DatasetRecord> read_dataset(std::istream& in);

}  // namespace qctc::forge
