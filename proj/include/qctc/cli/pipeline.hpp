#pragma once

#include <map>
#include <string>
#include <vector>

#include "qctc/forge/dataset.hpp"
#include "qctc/metrics/metrics.hpp"
#include "qctc/train/trainer.hpp"

// Glue between dataset records, region files, the model and the metrics.
namespace qctc::cli {

struct SampleSet {
  std::vector<TrainingSample> samples;
  std::vector<std::string> image_ids;  // aligned with samples
};

// One sample per record: all kept (cleaned) questions and their answers.
// Throws when a record's image has no regions or its OCR tokens differ from
// the region file's.
SampleSet make_samples(const std::vector<forge::DatasetRecord>& records,
                       const std::map<std::string, RegionSet>& regions);

// Questions, both initial captions and targets with their OCR words removed.
Vocabulary build_vocabulary(const std::vector<TrainingSample>& samples, std::size_t min_count = 1);

// Throws std::runtime_error when the vocabulary does not fit the model.
void check_compatible(const GqamModel& model, const Vocabulary& vocab);

// Greedy captions from the automatic initial caption, one pair per sample.
std::vector<metrics::EvalPair> generate(const GqamModel& model, const Vocabulary& vocab, const SampleSet& set);

std::string to_json_line(const metrics::EvalPair& p);

}  // namespace qctc::cli
