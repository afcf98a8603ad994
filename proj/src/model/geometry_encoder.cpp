#include "qctc/model/geometry_encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace qctc {

GeometryAttentionLayer::GeometryAttentionLayer(ParameterSet& ps, const std::string& prefix,
                                               std::size_t d_model, std::size_t heads, Rng& rng)
    : head_dim_(d_model / heads) {
  for (std::size_t h = 0; h < heads; ++h) {
    const std::string p = prefix + ".h" + std::to_string(h);
    head_geometry_.push_back(&ps.add(p + ".wg", xavier_uniform(4, 1, rng)));
    head_query_.push_back(&ps.add(p + ".wq", xavier_uniform(d_model, head_dim_, rng)));
    head_key_.push_back(&ps.add(p + ".wk", xavier_uniform(d_model, head_dim_, rng)));
  }
  out_ = Linear::create(ps, prefix + ".out", heads * d_model, d_model, rng);
  norm_ = LayerNorm::create(ps, prefix + ".ln", d_model);
}

GeometryAttentionLayer::Output GeometryAttentionLayer::forward(Tape& t, Var v,
                                                               const Tensor& geometry) const {
  const std::size_t n = v.rows();
  if (geometry.rows() != n * n || geometry.cols() != 4)
    throw std::invalid_argument("geometry matrix does not match the region count");
  Output out;
  Var g = t.constant(geometry);
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim_));
  std::vector<Var> heads;
  for (std::size_t h = 0; h < head_geometry_.size(); ++h) {
    Var sv = ad::scale(ad::matmul_nt(ad::matmul(v, t.parameter(*head_query_[h])),
                                     ad::matmul(v, t.parameter(*head_key_[h]))),
                       scale);
    Var sg = ad::relu(ad::reshape(ad::matmul(g, t.parameter(*head_geometry_[h])), n, n));
    Var alpha = ad::geometry_weights(sg, sv);
    heads.push_back(ad::matmul(alpha, v));
    out.geometry_scores.push_back(sg);
    out.visual_scores.push_back(sv);
    out.weights.push_back(alpha);
  }
  out.states = norm_(t, ad::add(v, out_(t, ad::concat_cols(heads))));
  return out;
}

GeometryEncoder::GeometryEncoder(ParameterSet& ps, const std::string& prefix, std::size_t d_model,
                                 std::size_t heads, std::size_t layers, Rng& rng) {
  for (std::size_t l = 0; l < layers; ++l)
    layers_.emplace_back(ps, prefix + ".l" + std::to_string(l), d_model, heads, rng);
}

GeometryEncoder::Output GeometryEncoder::forward(Tape& t, Var features,
                                                 const std::vector<BoundingBox>& boxes) const {
  if (boxes.empty() || features.rows() == 0)
    throw std::invalid_argument("geometry encoder needs at least one region");
  if (features.rows() != boxes.size())
    throw std::invalid_argument("region features and boxes disagree in count");
  const Tensor geometry = relative_geometry_matrix(boxes);
  Output out;
  out.states = features;
  for (const auto& layer : layers_) {
    auto res = layer.forward(t, out.states, geometry);
    AttentionTrace trace;
    for (std::size_t h = 0; h < res.weights.size(); ++h) {
      trace.geometry_scores.push_back(res.geometry_scores[h].value());
      trace.visual_scores.push_back(res.visual_scores[h].value());
      trace.weights.push_back(res.weights[h].value());
    }
    out.traces.push_back(std::move(trace));
    out.states = res.states;
  }
  return out;
}

}  // namespace qctc
