#pragma once

#include <string>
#include <vector>

#include "qctc/model/layers.hpp"

namespace qctc {

// Lengths of the five fused streams, in sequence order.
struct StreamLayout {
  std::size_t objects = 0;
  std::size_t ocr = 0;
  std::size_t question = 0;
  std::size_t initial = 0;
  std::size_t decoded = 0;

  std::size_t total() const { return objects + ocr + question + initial + decoded; }
  std::size_t ocr_begin() const { return objects; }
  std::size_t decoded_begin() const { return objects + ocr + question + initial; }
};

// Non-decoded slots see each other and no decoded slot; decoded slot t sees
// every non-decoded slot and decoded slots 0..t.
ad::Mask fusion_mask(const StreamLayout& layout);

// Scores over the joint vocabulary for one decoding step.
struct JointDistribution {
  Tensor vocab_scores;  // 1 x |V| pre-sigmoid
  Tensor ocr_scores;    // 1 x N_ocr pre-sigmoid
  Tensor combined;      // 1 x (|V| + N_ocr) after sigmoid

  std::size_t size() const { return combined.cols(); }
  // Highest combined score; ties go to the lowest index, so fixed-vocabulary
  // entries win over OCR entries.
  std::size_t argmax() const;
};

JointDistribution make_joint_distribution(const Tensor& logits_row, std::size_t vocab_size);

class MultimodalDecoder {
 public:
  MultimodalDecoder(ParameterSet& ps, std::size_t vocab_size, std::size_t d_model,
                    std::size_t heads, std::size_t ffn_dim, std::size_t layers,
                    std::size_t decoder_slots, std::size_t max_total, Rng& rng);

  struct Streams {
    Var objects, ocr, question, initial, decoded;  // any may have zero rows
  };

  // Runs the fusion transformer; returns the final-layer states of every slot.
  Var fuse(Tape& t, const Streams& s) const;

  // voc = FC(z_dec); ocr_k = (Wd z_dec + bd)^T (Wo z_ocr_k + bo); returns the
  // pre-sigmoid concatenation, one row per decoder state.
  Var pointer_scores(Tape& t, Var z_dec, Var z_ocr) const;

  // Embeddings of the decoded-list inputs: word embedding or copied OCR slot
  // embedding (joint ids >= |V|), plus decoder position, then layer norm.
  Var decoded_inputs(Tape& t, Var token_table, Var ocr_inputs,
                     std::span<const std::size_t> joint_ids) const;

  const Linear& vocab_head() const { return vocab_head_; }
  const Linear& pointer_decoder() const { return pointer_dec_; }
  const Linear& pointer_ocr() const { return pointer_ocr_; }
  std::size_t max_total() const { return max_total_; }

 private:
  std::size_t max_total_;
  Parameter* positions_;
  LayerNorm input_norm_;
  std::vector<TransformerLayer> layers_;
  Linear vocab_head_;
  Linear pointer_dec_;
  Linear pointer_ocr_;
};

}  // namespace qctc
