#pragma once

#include <cstddef>

// Row-level product shared by the serial and parallel kernels:
// out[j] = sum_k a[k * a_step] * b[k * ldb + j], summed over ascending k.
// Columns are processed in blocks held in registers.
namespace qctc::kernels::detail {

void product_row(const double* a, std::size_t a_step, std::size_t inner, const double* b,
                 std::size_t ldb, std::size_t n, double* out);

}  // namespace qctc::kernels::detail
