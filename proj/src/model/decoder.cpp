#include "qctc/model/decoder.hpp"

#include <numeric>
#include <stdexcept>

namespace qctc {

ad::Mask fusion_mask(const StreamLayout& layout) {
  const std::size_t n = layout.total();
  const std::size_t dec = layout.decoded_begin();
  ad::Mask mask(n, n, false);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dec; ++j) mask.set(i, j, true);
    if (i >= dec)
      for (std::size_t j = dec; j <= i; ++j) mask.set(i, j, true);
  }
  return mask;
}

std::size_t JointDistribution::argmax() const {
  if (combined.cols() == 0) throw std::logic_error("argmax of an empty distribution");
  std::size_t best = 0;
  for (std::size_t k = 1; k < combined.cols(); ++k)
    if (combined[k] > combined[best]) best = k;
  return best;
}

JointDistribution make_joint_distribution(const Tensor& logits_row, std::size_t vocab_size) {
  if (logits_row.rows() != 1 || logits_row.cols() < vocab_size)
    throw std::invalid_argument("joint logits row has the wrong shape");
  Tape t(false);
  JointDistribution d;
  const std::size_t n_ocr = logits_row.cols() - vocab_size;
  auto data = logits_row.data();
  d.vocab_scores = Tensor(1, vocab_size, std::vector<double>(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(vocab_size)));
  d.ocr_scores = Tensor(1, n_ocr, std::vector<double>(data.begin() + static_cast<std::ptrdiff_t>(vocab_size), data.end()));
  d.combined = ad::sigmoid(t.constant(logits_row)).value();
  return d;
}

MultimodalDecoder::MultimodalDecoder(ParameterSet& ps, std::size_t vocab_size, std::size_t d_model,
                                     std::size_t heads, std::size_t ffn_dim, std::size_t layers,
                                     std::size_t decoder_slots, std::size_t max_total, Rng& rng)
    : max_total_(max_total),
      positions_(&ps.add("dec.pos", normal_tensor(decoder_slots, d_model, 0.5, rng))),
      input_norm_(LayerNorm::create(ps, "dec.input_ln", d_model)) {
  for (std::size_t l = 0; l < layers; ++l)
    layers_.emplace_back(ps, "dec.l" + std::to_string(l), d_model, heads, ffn_dim, rng);
  vocab_head_ = Linear::create(ps, "dec.fc", d_model, vocab_size, rng);
  pointer_dec_ = Linear::create(ps, "ptr.dec", d_model, d_model, rng);
  pointer_ocr_ = Linear::create(ps, "ptr.ocr", d_model, d_model, rng);
}

Var MultimodalDecoder::fuse(Tape& t, const Streams& s) const {
  StreamLayout layout{s.objects.rows(), s.ocr.rows(), s.question.rows(), s.initial.rows(),
                      s.decoded.rows()};
  if (layout.total() > max_total_)
    throw std::invalid_argument("fused sequence of " + std::to_string(layout.total()) +
                                " slots exceeds the maximum of " + std::to_string(max_total_));
  if (layout.total() == 0) throw std::invalid_argument("nothing to fuse");
  const Var parts[] = {s.objects, s.ocr, s.question, s.initial, s.decoded};
  Var x = ad::concat_rows(parts);
  const ad::Mask mask = fusion_mask(layout);
  for (const auto& layer : layers_) x = layer.forward(t, x, &mask).states;
  return x;
}

Var MultimodalDecoder::pointer_scores(Tape& t, Var z_dec, Var z_ocr) const {
  Var vocab = vocab_head_(t, z_dec);
  if (z_ocr.rows() == 0) return vocab;
  Var ocr = ad::matmul_nt(pointer_dec_(t, z_dec), pointer_ocr_(t, z_ocr));
  const Var parts[] = {vocab, ocr};
  return ad::concat_cols(parts);
}

Var MultimodalDecoder::decoded_inputs(Tape& t, Var token_table, Var ocr_inputs,
                                      std::span<const std::size_t> joint_ids) const {
  if (joint_ids.size() > positions_->value.rows())
    throw std::invalid_argument("decoded list longer than the decoder position table");
  Var source = token_table;
  if (ocr_inputs.rows() > 0) {
    const Var parts[] = {token_table, ocr_inputs};
    source = ad::concat_rows(parts);
  }
  std::vector<std::size_t> positions(joint_ids.size());
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  Var x = ad::add(ad::gather_rows(source, joint_ids),
                  ad::gather_rows(t.parameter(*positions_), positions));
  return input_norm_(t, x);
}

}  // namespace qctc
