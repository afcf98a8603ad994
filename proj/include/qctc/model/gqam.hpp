#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qctc/model/config.hpp"
#include "qctc/model/decoder.hpp"
#include "qctc/model/geometry_encoder.hpp"
#include "qctc/model/question_encoder.hpp"
#include "qctc/model/regions.hpp"
#include "qctc/model/vocabulary.hpp"

namespace qctc {

// Everything the model reads for one image.
struct ModelInput {
  RegionSet regions;
  std::vector<std::size_t> question_ids;  // questions joined by the separator token
  std::vector<std::size_t> initial_ids;   // initial caption
};

// Per-image encoder outputs that do not depend on the decoded prefix.
struct Encoded {
  Var object_inputs, ocr_inputs;  // projected features, also the copy embeddings
  Var objects, ocr;               // geometry-informed features
  Var question;                   // question-guided tokens (may be empty)
  Var initial;                    // initial-caption tokens (may be empty)
  std::vector<AttentionTrace> traces;
  Var beta;  // invalid when there is no question
};

struct DecodedToken {
  bool from_ocr = false;
  std::size_t index = 0;  // vocabulary id or OCR slot
  double score = 0.0;     // post-sigmoid argmax score
  std::string word;
};

struct DecodedCaption {
  std::vector<DecodedToken> tokens;  // EOS excluded
  std::string text;
};

class GqamModel {
 public:
  GqamModel(const ModelConfig& config, std::uint64_t seed);
  GqamModel(const GqamModel&) = delete;
  GqamModel& operator=(const GqamModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterSet& parameters() { return *params_; }
  const ParameterSet& parameters() const { return *params_; }

  // Regions beyond max_objects / max_ocr are dropped here.
  Encoded encode(Tape& t, const ModelInput& input) const;

  // Pre-sigmoid joint scores, one row per decoded slot. Slot 0 holds BOS and
  // row t scores the token that follows decoded[t]. Joint ids >= |V| copy OCR
  // slot id - |V|.
  Var logits(Tape& t, const Encoded& enc, std::span<const std::size_t> decoded) const;

  DecodedCaption greedy_decode(const ModelInput& input, const Vocabulary& vocab,
                               std::size_t max_len) const;
  DecodedCaption greedy_decode(const ModelInput& input, const Vocabulary& vocab) const {
    return greedy_decode(input, vocab, config_.max_caption_len);
  }

  GeometryEncoder& geometry_encoder() { return *geometry_; }
  const TextEncoder& text_encoder() const { return *text_; }
  const QuestionGuidedAttention& question_attention() const { return *question_; }
  const MultimodalDecoder& decoder() const { return *decoder_; }

 private:
  ModelConfig config_;
  std::unique_ptr<ParameterSet> params_;
  Linear object_in_, ocr_in_;
  LayerNorm object_norm_, ocr_norm_;
  std::unique_ptr<GeometryEncoder> geometry_;
  std::unique_ptr<TextEncoder> text_;
  std::unique_ptr<QuestionGuidedAttention> question_;
  std::unique_ptr<MultimodalDecoder> decoder_;
};

}  // namespace qctc
