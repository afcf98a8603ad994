#include "grad_cases.hpp"

#include "qctc/model/vocabulary.hpp"

namespace qctc::testing {

namespace {

constexpr std::size_t kVocab = 8;
constexpr std::size_t kFeatures = 4;

BoundingBox random_box(Rng& rng) {
  return {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.05, 0.5),
          rng.uniform(0.05, 0.5)};
}

std::size_t random_word(Rng& rng) {
  return Vocabulary::kSep + 1 + rng.index(kVocab - Vocabulary::kSep - 1);
}

}  // namespace

GradCase make_grad_case(std::uint64_t seed) {
  Rng rng(seed);
  ModelConfig mc;
  mc.vocab_size = kVocab;
  mc.feature_dim = kFeatures;
  mc.d_model = 16;
  mc.heads = 2;
  mc.ffn_dim = 16;
  mc.fusion_layers = 1;
  mc.max_query_len = 6;
  mc.max_caption_len = 5;

  GradCase c;
  c.model = std::make_unique<GqamModel>(mc, rng.next());
  const std::size_t objects = 1 + rng.index(4);
  const std::size_t ocr = rng.index(4);
  RegionSet& r = c.input.regions;
  r.object_features = normal_tensor(objects, kFeatures, 1.0, rng);
  r.ocr_features = normal_tensor(ocr, kFeatures, 1.0, rng);
  for (std::size_t i = 0; i < objects; ++i) r.object_boxes.push_back(random_box(rng));
  for (std::size_t i = 0; i < ocr; ++i) {
    r.ocr_boxes.push_back(random_box(rng));
    r.ocr_tokens.push_back("w" + std::to_string(i));
  }
  for (std::size_t n = 1 + rng.index(6); n > 0; --n) c.input.question_ids.push_back(random_word(rng));
  for (std::size_t n = 1 + rng.index(6); n > 0; --n) c.input.initial_ids.push_back(random_word(rng));

  c.targets.joint_size = kVocab + ocr;
  for (std::size_t n = 1 + rng.index(3); n > 0; --n) {
    const std::size_t id = rng.index(c.targets.joint_size);
    c.targets.steps.push_back({{id}, id});
  }
  c.targets.steps.push_back({{Vocabulary::kEos}, Vocabulary::kEos});
  return c;
}

GradCheckResult check_grad_case(GradCase& c, double h) {
  const GqamModel& m = *c.model;
  auto loss = [&](Tape& t) {
    return caption_loss(m.logits(t, m.encode(t, c.input), c.targets.teacher_inputs()), c.targets);
  };
  return grad_check(loss, c.model->parameters().all(), h);
}

}  // namespace qctc::testing
