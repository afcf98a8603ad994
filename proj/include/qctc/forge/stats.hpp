#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qctc/forge/dataset.hpp"

namespace qctc::forge {

// Counts and mean token lengths over a dataset. Lengths are per tuple except
// L(Q), which is per kept question (cleaned form).
struct DatasetStats {
  std::size_t tuples = 0;
  std::size_t questions = 0;
  std::size_t images = 0;
  double caption_length = 0.0;
  double question_length = 0.0;
  double ocr_length = 0.0;
  double pseudo_initial_length = 0.0;
  double auto_initial_length = 0.0;
  // Share of object words in the automatic initial caption that also occur in
  // the target caption, pooled over the corpus. Absent without a lexicon or
  // when no object word occurs.
  std::optional<double> object_precision;
};

DatasetStats dataset_stats(const std::vector<DatasetRecord>& records,
                           const std::set<std::string>* object_lexicon = nullptr);

// One normalized word per line, '#' comments.
std::set<std::string> parse_word_list(std::string_view text);

std::string stats_table(const DatasetStats& s);
std::string stats_csv(const DatasetStats& s);

}  // namespace qctc::forge
