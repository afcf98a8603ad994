#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qctc/numeric/tape.hpp"

// Differentiable operations on tape variables. Every op is 2-D; there is no
// general broadcasting, only the explicit row-bias form used by linear layers.
namespace qctc::ad {

// Visibility pattern for attention: visible(i, j) != 0 means query i may see key j.
struct Mask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> visible;

  Mask() = default;
  Mask(std::size_t r, std::size_t c, bool all_visible = true)
      : rows(r), cols(c), visible(r * c, all_visible ? 1 : 0) {}
  bool operator()(std::size_t i, std::size_t j) const { return visible[i * cols + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v) { visible[i * cols + j] = v ? 1 : 0; }
};

inline constexpr double kLogClampEpsilon = 1e-3;
inline constexpr double kProbabilityClamp = 1e-12;

Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b);  // a * b^T
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_row(Var a, Var row);  // adds a 1 x n row to every row of a

Var relu(Var a);
Var gelu(Var a);  // tanh approximation
Var sigmoid(Var a);
Var log_clamp(Var a, double epsilon = kLogClampEpsilon);  // log(max(x, eps))

Var softmax_rows(Var a);
// Masked entries receive exactly zero weight; a fully masked row is rejected.
Var masked_softmax_rows(Var a, const Mask& mask);

// Row-normalises sg * exp(sv). Rows whose normaliser is zero fall back to
// uniform weights (and pass no gradient).
Var geometry_weights(Var sg, Var sv);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var gather_rows(Var a, std::span<const std::size_t> rows);
Var reshape(Var a, std::size_t rows, std::size_t cols);

Var layer_norm(Var x, Var gain, Var bias, double epsilon = 1e-5);
Var linear(Var x, Var weight, Var bias);
Var sum(Var a);

// -sum[y log p + (1-y) log(1-p)] with p clamped to [1e-12, 1-1e-12].
// With literal = true only the -sum y log p term is kept.
Var binary_cross_entropy(Var probs, const Tensor& targets, bool literal = false);
// Same loss with p = sigmoid(logits), evaluated in softplus form. Logits are
// clamped to the equivalent range, with zero gradient outside it.
Var binary_cross_entropy_logits(Var logits, const Tensor& targets, bool literal = false);

struct Attention {
  Var output;
  Var weights;
};

// softmax(scale * q k^T) v, optionally masked.
Attention scaled_dot_attention(Var q, Var k, Var v, double scale, const Mask* mask = nullptr);

}  // namespace qctc::ad
