#include "qctc/cli/pipeline.hpp"

#include <set>
#include <stdexcept>

#include "json.hpp"
#include "qctc/text/normalize.hpp"

namespace qctc::cli {

SampleSet make_samples(const std::vector<forge::DatasetRecord>& records,
                       const std::map<std::string, RegionSet>& regions) {
  SampleSet out;
  for (const auto& r : records) {
    const auto it = regions.find(r.image_id);
    if (it == regions.end()) throw std::runtime_error("record '" + r.id + "': no regions for image '" + r.image_id + "'");
    std::vector<std::string> ocr;
    for (const auto& o : r.ocr) ocr.push_back(o.text);
    if (ocr != it->second.ocr_tokens)
      throw std::runtime_error("record '" + r.id + "': OCR tokens differ from the region file for image '" +
                               r.image_id + "'");
    TrainingSample s;
    s.id = r.id;
    s.regions = it->second;
    s.target = r.caption;
    for (const auto& q : r.questions) {
      if (!q.kept) continue;
      s.questions.push_back(q.cleaned);
      s.answers.push_back(q.answer);
    }
    s.auto_initial = r.auto_initial;
    s.pseudo_initial = TrackedText(r.pseudo_initial);
    out.samples.push_back(std::move(s));
    out.image_ids.push_back(r.image_id);
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<TrainingSample>& samples, std::size_t min_count) {
  std::vector<std::string> texts;
  for (const auto& s : samples) {
    std::set<std::string> ocr;
    for (const auto& t : s.regions.ocr_tokens)
      for (auto& w : text::tokenize(t)) ocr.insert(std::move(w));
    std::vector<std::string> target;
    for (auto& w : text::tokenize(s.target))
      if (!ocr.count(w)) target.push_back(std::move(w));
    texts.push_back(text::join(target));
    for (const auto& q : s.questions) texts.push_back(q);
    texts.push_back(s.auto_initial);
    texts.push_back(s.pseudo_initial.read());
  }
  return Vocabulary::build(texts, min_count);
}

void check_compatible(const GqamModel& model, const Vocabulary& vocab) {
  if (model.config().vocab_size != vocab.size())
    throw std::runtime_error("checkpoint expects a vocabulary of " + std::to_string(model.config().vocab_size) +
                             " tokens, vocabulary file has " + std::to_string(vocab.size()));
}

std::vector<metrics::EvalPair> generate(const GqamModel& model, const Vocabulary& vocab, const SampleSet& set) {
  check_compatible(model, vocab);
  std::vector<metrics::EvalPair> out(set.samples.size());
  const auto n = static_cast<std::ptrdiff_t>(set.samples.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const TrainingSample& s = set.samples[u];
    metrics::EvalPair& p = out[u];
    p.id = s.id;
    p.candidate = model.greedy_decode(make_inference_input(s, vocab, model.config()), vocab).text;
    p.references = {s.target};
    p.answers = s.answers;
    p.group_id = set.image_ids[u];
  }
  return out;
}

std::string to_json_line(const metrics::EvalPair& p) {
  const nlohmann::json j = {{"id", p.id},
                            {"candidate", p.candidate},
                            {"references", p.references},
                            {"answers", p.answers},
                            {"group_id", p.group_id}};
  return j.dump();
}

}  // namespace qctc::cli
