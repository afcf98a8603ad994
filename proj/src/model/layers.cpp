#include "qctc/model/layers.hpp"

#include <cmath>

namespace qctc {

Linear Linear::create(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t out,
                      Rng& rng, bool with_bias) {
  Linear l;
  l.weight = &ps.add(name + ".w", xavier_uniform(in, out, rng));
  if (with_bias) l.bias = &ps.add(name + ".b", Tensor(1, out));
  return l;
}

Var Linear::operator()(Tape& t, Var x) const {
  if (!bias) return ad::matmul(x, t.parameter(*weight));
  return ad::linear(x, t.parameter(*weight), t.parameter(*bias));
}

LayerNorm LayerNorm::create(ParameterSet& ps, const std::string& name, std::size_t width) {
  LayerNorm ln;
  ln.gain = &ps.add(name + ".gain", Tensor(1, width, 1.0));
  ln.bias = &ps.add(name + ".bias", Tensor(1, width));
  return ln;
}

Var LayerNorm::operator()(Tape& t, Var x) const {
  return ad::layer_norm(x, t.parameter(*gain), t.parameter(*bias));
}

TransformerLayer::TransformerLayer(ParameterSet& ps, const std::string& prefix, std::size_t d_model,
                                   std::size_t heads, std::size_t ffn_dim, Rng& rng)
    : heads_(heads),
      head_dim_(d_model / heads),
      query_(Linear::create(ps, prefix + ".q", d_model, d_model, rng)),
      key_(Linear::create(ps, prefix + ".k", d_model, d_model, rng, false)),
      value_(Linear::create(ps, prefix + ".v", d_model, d_model, rng)),
      out_(Linear::create(ps, prefix + ".o", d_model, d_model, rng)),
      ffn_in_(Linear::create(ps, prefix + ".ffn1", d_model, ffn_dim, rng)),
      ffn_out_(Linear::create(ps, prefix + ".ffn2", ffn_dim, d_model, rng)),
      norm_attn_(LayerNorm::create(ps, prefix + ".ln1", d_model)),
      norm_ffn_(LayerNorm::create(ps, prefix + ".ln2", d_model)) {}

TransformerLayer::Output TransformerLayer::forward(Tape& t, Var x, const ad::Mask* mask) const {
  Output out;
  if (x.rows() == 0) {
    out.states = x;
    return out;
  }
  Var q = query_(t, x), k = key_(t, x), v = value_(t, x);
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
  std::vector<Var> heads;
  for (std::size_t h = 0; h < heads_; ++h) {
    const std::size_t off = h * head_dim_;
    auto att = ad::scaled_dot_attention(ad::slice_cols(q, off, head_dim_),
                                        ad::slice_cols(k, off, head_dim_),
                                        ad::slice_cols(v, off, head_dim_), scale, mask);
    heads.push_back(att.output);
    out.attention.push_back(att.weights);
  }
  Var attended = out_(t, ad::concat_cols(heads));
  Var h1 = norm_attn_(t, ad::add(x, attended));
  Var ff = ffn_out_(t, ad::gelu(ffn_in_(t, h1)));
  out.states = norm_ffn_(t, ad::add(h1, ff));
  return out;
}

}  // namespace qctc
