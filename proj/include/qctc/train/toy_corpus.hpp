#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qctc/train/trainer.hpp"

namespace qctc {

// Small synthetic corpus: every image carries two question sets, each paired
// with its own target caption that copies a different OCR word. OCR words
// are invented strings that never enter the fixed vocabulary.
struct ToyCorpus {
  std::vector<TrainingSample> samples;
  Vocabulary vocab;
  // Indices of the two samples that share an image.
  std::vector<std::pair<std::size_t, std::size_t>> image_pairs;
};

ToyCorpus make_toy_corpus(std::uint64_t seed, std::size_t images = 10,
                          std::size_t feature_dim = 16);

}  // namespace qctc
