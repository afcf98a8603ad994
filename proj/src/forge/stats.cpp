#include "qctc/forge/stats.hpp"

#include <cstdio>
#include <sstream>

#include "qctc/text/normalize.hpp"

namespace qctc::forge {

namespace {

double mean(double total, std::size_t count) { return count == 0 ? 0.0 : total / static_cast<double>(count); }

struct Row {
  std::string name;
  std::string value;
};

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::vector<Row> rows(const DatasetStats& s) {
  std::vector<Row> out = {{"N(Tuple)", std::to_string(s.tuples)},
                          {"N(Q)", std::to_string(s.questions)},
                          {"N(I)", std::to_string(s.images)},
                          {"L(Y)", fixed(s.caption_length)},
                          {"L(Q)", fixed(s.question_length)},
                          {"L(O)", fixed(s.ocr_length)},
                          {"L(pseudo C_ini)", fixed(s.pseudo_initial_length)},
                          {"L(C_ini)", fixed(s.auto_initial_length)}};
  out.push_back({"P_obj(C_ini)", s.object_precision ? fixed(100.0 * *s.object_precision) : "-"});
  return out;
}

}  // namespace

DatasetStats dataset_stats(const std::vector<DatasetRecord>& records, const std::set<std::string>* object_lexicon) {
  DatasetStats s;
  s.tuples = records.size();
  std::set<std::string> images;
  double y = 0, q = 0, o = 0, pseudo = 0, ini = 0;
  std::size_t objects = 0, hits = 0;
  for (const auto& r : records) {
    images.insert(r.image_id);
    const auto target = text::tokenize(r.caption);
    const auto initial = text::tokenize(r.auto_initial);
    y += static_cast<double>(target.size());
    pseudo += static_cast<double>(text::tokenize(r.pseudo_initial).size());
    ini += static_cast<double>(initial.size());
    o += static_cast<double>(r.ocr.size());
    for (const auto& qr : r.questions) {
      if (!qr.kept) continue;
      ++s.questions;
      q += static_cast<double>(text::tokenize(qr.cleaned).size());
    }
    if (object_lexicon) {
      const std::set<std::string> in_target(target.begin(), target.end());
      for (const auto& w : initial) {
        if (!object_lexicon->count(w)) continue;
        ++objects;
        hits += in_target.count(w);
      }
    }
  }
  s.images = images.size();
  s.caption_length = mean(y, s.tuples);
  s.question_length = mean(q, s.questions);
  s.ocr_length = mean(o, s.tuples);
  s.pseudo_initial_length = mean(pseudo, s.tuples);
  s.auto_initial_length = mean(ini, s.tuples);
  if (object_lexicon && objects > 0) s.object_precision = mean(static_cast<double>(hits), objects);
  return s;
}

std::set<std::string> parse_word_list(std::string_view text) {
  std::set<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    for (auto& w : text::tokenize(line)) out.insert(std::move(w));
  }
  return out;
}

std::string stats_table(const DatasetStats& s) {
  const auto r = rows(s);
  std::size_t width = 0;
  for (const auto& row : r) width = std::max(width, row.name.size());
  std::string out;
  for (const auto& row : r) out += row.name + std::string(width - row.name.size() + 2, ' ') + row.value + "\n";
  return out;
}

std::string stats_csv(const DatasetStats& s) {
  const auto r = rows(s);
  std::string head, values;
  for (std::size_t i = 0; i < r.size(); ++i) {
    head += (i ? "," : "") + r[i].name;
    values += (i ? "," : "") + (r[i].value == "-" ? std::string() : r[i].value);
  }
  return head + "\n" + values + "\n";
}

}  // namespace qctc::forge
