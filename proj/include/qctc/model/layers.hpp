#pragma once

#include <string>
#include <vector>

#include "qctc/numeric/ops.hpp"
#include "qctc/numeric/parameter.hpp"

namespace qctc {

struct Linear {
  Parameter* weight = nullptr;  // in x out
  Parameter* bias = nullptr;    // 1 x out, null without bias

  static Linear create(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t out,
                       Rng& rng, bool with_bias = true);
  Var operator()(Tape& t, Var x) const;
};

struct LayerNorm {
  Parameter* gain = nullptr;
  Parameter* bias = nullptr;

  static LayerNorm create(ParameterSet& ps, const std::string& name, std::size_t width);
  Var operator()(Tape& t, Var x) const;
};

// Post-norm transformer block: LN(x + MHA(x)), then LN(h + FFN(h)) with a
// GELU feed-forward. Keys carry no bias.
class TransformerLayer {
 public:
  TransformerLayer(ParameterSet& ps, const std::string& prefix, std::size_t d_model,
                   std::size_t heads, std::size_t ffn_dim, Rng& rng);

  struct Output {
    Var states;
    std::vector<Var> attention;  // one weight matrix per head
  };

  Output forward(Tape& t, Var x, const ad::Mask* mask = nullptr) const;

 private:
  std::size_t heads_;
  std::size_t head_dim_;
  Linear query_, key_, value_, out_;
  Linear ffn_in_, ffn_out_;
  LayerNorm norm_attn_, norm_ffn_;
};

}  // namespace qctc
