#pragma once

#include <string>
#include <vector>

#include "qctc/model/layers.hpp"
#include "qctc/model/regions.hpp"

namespace qctc {

// Per-head scores of one geometry self-attention layer.
struct AttentionTrace {
  std::vector<Tensor> geometry_scores;  // s^g, N x N, non-negative
  std::vector<Tensor> visual_scores;    // s^v, N x N
  std::vector<Tensor> weights;          // alpha, N x N, row-stochastic
};

// One layer of geometry-informed self-attention over the joint region
// sequence. Per head:
//   s^v_ij = (v_i Wq)(v_j Wk)^T / sqrt(d_head)
//   s^g_ij = relu(relative_geometry(b_i, b_j) . Wg)
//   alpha_ij = s^g_ij exp(s^v_ij) / sum_k s^g_ik exp(s^v_ik)   (uniform if the sum is 0)
//   head_i = alpha_i V
// Heads are concatenated and projected back to d, then LN(V + projection).
class GeometryAttentionLayer {
 public:
  GeometryAttentionLayer(ParameterSet& ps, const std::string& prefix, std::size_t d_model,
                         std::size_t heads, Rng& rng);

  struct Output {
    Var states;
    std::vector<Var> geometry_scores, visual_scores, weights;
  };

  // geometry is relative_geometry_matrix(boxes), (N*N) x 4.
  Output forward(Tape& t, Var v, const Tensor& geometry) const;

  std::size_t heads() const { return head_geometry_.size(); }
  Parameter& geometry_projection(std::size_t head) { return *head_geometry_[head]; }
  Parameter& query_projection(std::size_t head) { return *head_query_[head]; }
  Parameter& key_projection(std::size_t head) { return *head_key_[head]; }
  const Linear& output_projection() const { return out_; }

 private:
  std::size_t head_dim_;
  std::vector<Parameter*> head_geometry_;  // 4 x 1
  std::vector<Parameter*> head_query_;     // d x d_head
  std::vector<Parameter*> head_key_;       // d x d_head
  Linear out_;                             // (heads * d) x d
  LayerNorm norm_;
};

class GeometryEncoder {
 public:
  GeometryEncoder(ParameterSet& ps, const std::string& prefix, std::size_t d_model,
                  std::size_t heads, std::size_t layers, Rng& rng);

  struct Output {
    Var states;
    std::vector<AttentionTrace> traces;  // one per layer
  };

  // Rejects an empty region sequence.
  Output forward(Tape& t, Var features, const std::vector<BoundingBox>& boxes) const;

  std::vector<GeometryAttentionLayer>& layers() { return layers_; }

 private:
  std::vector<GeometryAttentionLayer> layers_;
};

}  // namespace qctc
