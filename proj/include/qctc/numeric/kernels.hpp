#pragma once

#include "qctc/numeric/tensor.hpp"

// Dense kernels in two flavours: a plain serial reference and an OpenMP
// version that splits output rows across threads. Both compute every output
// element with the same summation order, so results agree bitwise.
namespace qctc::kernels {

namespace serial {
Tensor matmul(const Tensor& a, const Tensor& b);     // a * b
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a * b^T
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // a^T * b
Tensor softmax_rows(const Tensor& x);
}  // namespace serial

namespace parallel {
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor softmax_rows(const Tensor& x);
}  // namespace parallel

// Dispatchers: use the parallel kernel once the output is large enough to
// amortize thread start-up, otherwise the serial one.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor softmax_rows(const Tensor& x);

// Work (multiply-adds) above which the dispatchers go parallel.
inline constexpr std::size_t kParallelWorkThreshold = 1u << 16;

int max_threads();

}  // namespace qctc::kernels
