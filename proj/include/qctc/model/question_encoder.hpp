#pragma once

#include <span>
#include <string>
#include <vector>

#include "qctc/model/layers.hpp"

namespace qctc {

enum class SequenceKind : std::size_t { kQuestion = 0, kInitialCaption = 1 };

// Token encoder shared by questions and initial captions: token embedding +
// position embedding + kind (segment) embedding, then a small transformer.
// The token embedding table is also the decoder's word embedding.
class TextEncoder {
 public:
  TextEncoder(ParameterSet& ps, std::size_t vocab_size, std::size_t d_model, std::size_t heads,
              std::size_t ffn_dim, std::size_t layers, std::size_t max_len, Rng& rng);

  // Rejects empty sequences, sequences longer than max_len and ids outside
  // the vocabulary.
  Var embed(Tape& t, std::span<const std::size_t> ids, SequenceKind kind) const;

  Parameter& token_table() const { return *tokens_; }
  Parameter& position_table() const { return *positions_; }
  Parameter& segment_table() const { return *segments_; }

 private:
  Parameter* tokens_;
  Parameter* positions_;
  Parameter* segments_;
  std::vector<TransformerLayer> layers_;
};

// Question tokens attend over geometry-informed region features:
//   s^q_ij = (t_i Wq)(v_j Wk)^T,  beta_i = softmax_j(s^q_i),  t^v_i = beta_i V
//   out_i  = t^v_i Wv + t_i Wt
class QuestionGuidedAttention {
 public:
  QuestionGuidedAttention(ParameterSet& ps, const std::string& prefix, std::size_t d_model,
                          bool scaled, Rng& rng);

  struct Output {
    Var tokens;  // N_que x d
    Var beta;    // N_que x N
  };

  Output forward(Tape& t, Var question, Var visual) const;

  Parameter& query() const { return *query_; }
  Parameter& key() const { return *key_; }
  Parameter& visual_out() const { return *visual_out_; }
  Parameter& text_out() const { return *text_out_; }

 private:
  bool scaled_;
  Parameter* query_;
  Parameter* key_;
  Parameter* visual_out_;
  Parameter* text_out_;
};

}  // namespace qctc
