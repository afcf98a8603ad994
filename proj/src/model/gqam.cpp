#include "qctc/model/gqam.hpp"

#include <stdexcept>

#include "qctc/text/normalize.hpp"

namespace qctc {

GqamModel::GqamModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config), params_(std::make_unique<ParameterSet>()) {
  config_.validate();
  Rng rng(seed);
  ParameterSet& ps = *params_;
  const std::size_t d = config_.d_model;
  object_in_ = Linear::create(ps, "in.obj", config_.feature_dim, d, rng);
  ocr_in_ = Linear::create(ps, "in.ocr", config_.feature_dim, d, rng);
  object_norm_ = LayerNorm::create(ps, "in.obj_ln", d);
  ocr_norm_ = LayerNorm::create(ps, "in.ocr_ln", d);
  geometry_ = std::make_unique<GeometryEncoder>(ps, "geo", d, config_.heads,
                                                config_.use_geometry ? config_.geometry_layers : 0,
                                                rng);
  text_ = std::make_unique<TextEncoder>(ps, config_.vocab_size, d, config_.heads, config_.ffn_dim,
                                        config_.text_layers, config_.max_query_len, rng);
  question_ = std::make_unique<QuestionGuidedAttention>(ps, "qga", d,
                                                        config_.scale_question_attention, rng);
  decoder_ = std::make_unique<MultimodalDecoder>(ps, config_.vocab_size, d, config_.heads,
                                                 config_.ffn_dim, config_.fusion_layers,
                                                 config_.decoder_slots(),
                                                 config_.max_fusion_len(), rng);
}

Encoded GqamModel::encode(Tape& t, const ModelInput& input) const {
  const RegionSet regions = input.regions.truncated(config_.max_objects, config_.max_ocr);
  regions.validate();
  if (regions.size() == 0) throw std::invalid_argument("model input has no regions");
  for (const Tensor* f : {&regions.object_features, &regions.ocr_features})
    if (f->rows() > 0 && f->cols() != config_.feature_dim)
      throw std::invalid_argument("region features have width " + std::to_string(f->cols()) +
                                  ", expected " + std::to_string(config_.feature_dim));

  const std::size_t d = config_.d_model;
  auto project = [&](const Tensor& features, const Linear& lin, const LayerNorm& ln) {
    if (features.rows() == 0) return t.constant(Tensor(0, d));
    return ln(t, lin(t, t.constant(features)));
  };
  Encoded enc;
  enc.object_inputs = project(regions.object_features, object_in_, object_norm_);
  enc.ocr_inputs = project(regions.ocr_features, ocr_in_, ocr_norm_);

  const Var joint_parts[] = {enc.object_inputs, enc.ocr_inputs};
  Var visual = ad::concat_rows(joint_parts);
  if (config_.use_geometry) {
    auto geo = geometry_->forward(t, visual, regions.joint_boxes());
    visual = geo.states;
    enc.traces = std::move(geo.traces);
  }
  const std::size_t n_obj = regions.object_count();
  enc.objects = ad::slice_rows(visual, 0, n_obj);
  enc.ocr = ad::slice_rows(visual, n_obj, regions.ocr_count());

  if (input.question_ids.empty()) {
    enc.question = t.constant(Tensor(0, d));
  } else {
    auto qga = question_->forward(
        t, text_->embed(t, input.question_ids, SequenceKind::kQuestion), visual);
    enc.question = qga.tokens;
    enc.beta = qga.beta;
  }
  enc.initial = input.initial_ids.empty()
                    ? t.constant(Tensor(0, d))
                    : text_->embed(t, input.initial_ids, SequenceKind::kInitialCaption);
  return enc;
}

Var GqamModel::logits(Tape& t, const Encoded& enc, std::span<const std::size_t> decoded) const {
  if (decoded.empty()) throw std::invalid_argument("decoded list must hold at least BOS");
  const std::size_t joint = config_.vocab_size + enc.ocr_inputs.rows();
  for (std::size_t id : decoded)
    if (id >= joint)
      throw std::invalid_argument("decoded id " + std::to_string(id) +
                                  " outside the joint vocabulary");
  Var dec_in = decoder_->decoded_inputs(t, t.parameter(text_->token_table()), enc.ocr_inputs,
                                        decoded);
  Var z = decoder_->fuse(t, {enc.objects, enc.ocr, enc.question, enc.initial, dec_in});
  const StreamLayout layout{enc.objects.rows(), enc.ocr.rows(), enc.question.rows(),
                            enc.initial.rows(), decoded.size()};
  Var z_dec = ad::slice_rows(z, layout.decoded_begin(), layout.decoded);
  Var z_ocr = ad::slice_rows(z, layout.ocr_begin(), layout.ocr);
  return decoder_->pointer_scores(t, z_dec, z_ocr);
}

DecodedCaption GqamModel::greedy_decode(const ModelInput& input, const Vocabulary& vocab,
                                        std::size_t max_len) const {
  if (vocab.size() != config_.vocab_size)
    throw std::invalid_argument("vocabulary size does not match the model");
  max_len = std::min(max_len, config_.max_caption_len);
  Tape t(false);
  const Encoded enc = encode(t, input);
  const auto& ocr_tokens = input.regions.truncated(config_.max_objects, config_.max_ocr).ocr_tokens;

  DecodedCaption out;
  std::vector<std::size_t> decoded{Vocabulary::kBos};
  std::vector<std::string> words;
  while (out.tokens.size() < max_len) {
    const Tensor scores = logits(t, enc, decoded).value();
    const Tensor last(1, scores.cols(),
                      std::vector<double>(scores.row(scores.rows() - 1).begin(),
                                          scores.row(scores.rows() - 1).end()));
    const JointDistribution dist = make_joint_distribution(last, config_.vocab_size);
    const std::size_t pick = dist.argmax();
    if (pick == Vocabulary::kEos) break;
    DecodedToken tok;
    tok.score = dist.combined[pick];
    if (pick >= config_.vocab_size) {
      tok.from_ocr = true;
      tok.index = pick - config_.vocab_size;
      tok.word = text::normalize_token(ocr_tokens[tok.index]);
    } else {
      tok.index = pick;
      tok.word = vocab.token(pick);
    }
    words.push_back(tok.word);
    out.tokens.push_back(std::move(tok));
    decoded.push_back(pick);
  }
  out.text = text::join(words);
  return out;
}

}  // namespace qctc
