#include "qctc/model/question_encoder.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qctc {

namespace {

constexpr double kEmbeddingStd = 0.5;

// Xavier init shrunk by d^(-1/4).
Tensor score_projection(std::size_t d_model, Rng& rng) {
  Tensor w = xavier_uniform(d_model, d_model, rng);
  const double shrink = std::pow(static_cast<double>(d_model), -0.25);
  for (double& v : w.data()) v *= shrink;
  return w;
}

}  // namespace

TextEncoder::TextEncoder(ParameterSet& ps, std::size_t vocab_size, std::size_t d_model,
                         std::size_t heads, std::size_t ffn_dim, std::size_t layers,
                         std::size_t max_len, Rng& rng)
    : tokens_(&ps.add("tok.embed", normal_tensor(vocab_size, d_model, kEmbeddingStd, rng))),
      positions_(&ps.add("txt.pos", normal_tensor(max_len, d_model, kEmbeddingStd, rng))),
      segments_(&ps.add("txt.segment", normal_tensor(2, d_model, kEmbeddingStd, rng))) {
  for (std::size_t l = 0; l < layers; ++l)
    layers_.emplace_back(ps, "txt.l" + std::to_string(l), d_model, heads, ffn_dim, rng);
}

Var TextEncoder::embed(Tape& t, std::span<const std::size_t> ids, SequenceKind kind) const {
  if (ids.empty()) throw std::invalid_argument("cannot embed an empty token sequence");
  if (ids.size() > positions_->value.rows())
    throw std::invalid_argument("token sequence longer than " +
                                std::to_string(positions_->value.rows()));
  for (std::size_t id : ids)
    if (id >= tokens_->value.rows())
      throw std::invalid_argument("token id " + std::to_string(id) + " outside the vocabulary");

  std::vector<std::size_t> positions(ids.size());
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  const std::vector<std::size_t> segment(ids.size(), static_cast<std::size_t>(kind));

  Var x = ad::add(ad::gather_rows(t.parameter(*tokens_), ids),
                  ad::add(ad::gather_rows(t.parameter(*positions_), positions),
                          ad::gather_rows(t.parameter(*segments_), segment)));
  for (const auto& layer : layers_) x = layer.forward(t, x).states;
  return x;
}

QuestionGuidedAttention::QuestionGuidedAttention(ParameterSet& ps, const std::string& prefix,
                                                 std::size_t d_model, bool scaled, Rng& rng)
    : scaled_(scaled),
      query_(&ps.add(prefix + ".wq", score_projection(d_model, rng))),
      key_(&ps.add(prefix + ".wk", score_projection(d_model, rng))),
      visual_out_(&ps.add(prefix + ".wv", xavier_uniform(d_model, d_model, rng))),
      text_out_(&ps.add(prefix + ".wt", xavier_uniform(d_model, d_model, rng))) {}

QuestionGuidedAttention::Output QuestionGuidedAttention::forward(Tape& t, Var question,
                                                                 Var visual) const {
  if (question.rows() == 0 || visual.rows() == 0)
    throw std::invalid_argument("question-guided attention needs tokens and regions");
  if (question.cols() != query_->value.rows() || visual.cols() != key_->value.rows())
    throw std::invalid_argument("question-guided attention: dimension mismatch");
  Var scores = ad::matmul_nt(ad::matmul(question, t.parameter(*query_)),
                             ad::matmul(visual, t.parameter(*key_)));
  if (scaled_) scores = ad::scale(scores, 1.0 / std::sqrt(static_cast<double>(question.cols())));
  Output out;
  out.beta = ad::softmax_rows(scores);
  Var attended = ad::matmul(out.beta, visual);
  out.tokens = ad::add(ad::matmul(attended, t.parameter(*visual_out_)),
                       ad::matmul(question, t.parameter(*text_out_)));
  return out;
}

}  // namespace qctc
