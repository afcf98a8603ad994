#include "qctc/train/toy_corpus.hpp"

#include <set>
#include <stdexcept>

namespace qctc {

namespace {

const char* const kNouns[] = {"sign", "bottle", "book",  "shirt", "bus",   "door",
                              "wall", "poster", "box",   "cup",   "truck", "banner"};
constexpr std::size_t kNounCount = sizeof(kNouns) / sizeof(kNouns[0]);

std::string invented_word(Rng& rng) {
  static const char consonants[] = "bdfgklmnprstvz";
  static const char vowels[] = "aeiou";
  std::string w;
  for (int s = 0; s < 3; ++s) {
    w += consonants[rng.index(sizeof(consonants) - 1)];
    w += vowels[rng.index(sizeof(vowels) - 1)];
  }
  return w;
}

BoundingBox random_box(Rng& rng) {
  return {rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85), rng.uniform(0.1, 0.4),
          rng.uniform(0.1, 0.4)};
}

}  // namespace

ToyCorpus make_toy_corpus(std::uint64_t seed, std::size_t images, std::size_t feature_dim) {
  if (images == 0 || images > kNounCount) throw std::invalid_argument("toy corpus image count out of range");
  Rng rng(seed);
  ToyCorpus c;
  std::set<std::string> used;
  std::vector<std::string> texts;

  for (std::size_t i = 0; i < images; ++i) {
    const std::string a = kNouns[i];
    const std::string b = kNouns[(i + 5) % kNounCount];
    std::vector<std::string> ocr;
    while (ocr.size() < 3) {
      std::string w = invented_word(rng);
      if (used.insert(w).second) ocr.push_back(w);
    }

    RegionSet regions;
    regions.object_features = uniform_tensor(2, feature_dim, -1.0, 1.0, rng);
    regions.ocr_features = uniform_tensor(3, feature_dim, -1.0, 1.0, rng);
    regions.object_boxes = {random_box(rng), random_box(rng)};
    regions.ocr_boxes = {random_box(rng), random_box(rng), random_box(rng)};
    regions.ocr_tokens = ocr;

    const std::string id = "toy" + std::to_string(i);
    const std::string initial = "a " + a + " and a " + b;

    TrainingSample first;
    first.id = id + "_q0";
    first.regions = regions;
    first.questions = {"what does the " + a + " say"};
    first.answers = {ocr[0]};
    first.target = "a " + a + " that says " + ocr[0] + " near a " + b;
    first.auto_initial = initial;
    first.pseudo_initial = TrackedText("a " + a + " near a " + b);

    TrainingSample second;
    second.id = id + "_q1";
    second.regions = regions;
    second.questions = {"what is written on the " + b};
    second.answers = {ocr[1]};
    second.target = "the " + b + " has the word " + ocr[1] + " on it";
    second.auto_initial = initial;
    second.pseudo_initial = TrackedText("the " + b + " has the word on it");

    texts.push_back("a " + a + " that says near a " + b);
    for (const TrainingSample* s : {&first, &second}) {
      texts.push_back(s->questions[0]);
      texts.push_back(s->auto_initial);
      texts.push_back(s->pseudo_initial.read());
    }
    c.image_pairs.emplace_back(c.samples.size(), c.samples.size() + 1);
    c.samples.push_back(std::move(first));
    c.samples.push_back(std::move(second));
  }
  for (auto& s : c.samples) s.pseudo_initial.reset_reads();
  c.vocab = Vocabulary::build(texts);
  return c;
}

}  // namespace qctc
