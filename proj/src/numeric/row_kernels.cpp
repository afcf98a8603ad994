#include "row_kernels.hpp"

#include <algorithm>

namespace qctc::kernels::detail {

namespace {
constexpr std::size_t kBlock = 8;
}  // namespace

// Both clones give bitwise-identical results.
#if defined(__x86_64__) && defined(__GNUC__)
__attribute__((target_clones("avx2", "default")))
#endif
void product_row(const double* a, std::size_t a_step, std::size_t inner, const double* b,
                 std::size_t ldb, std::size_t n, double* out) {
  std::size_t j0 = 0;
  for (; j0 + kBlock <= n; j0 += kBlock) {
    double acc[kBlock] = {};
    for (std::size_t k = 0; k < inner; ++k) {
      const double x = a[k * a_step];
      const double* r = b + k * ldb + j0;
      for (std::size_t j = 0; j < kBlock; ++j) acc[j] += x * r[j];
    }
    std::copy(acc, acc + kBlock, out + j0);
  }
  if (j0 == n) return;
  const std::size_t w = n - j0;
  double acc[kBlock] = {};
  for (std::size_t k = 0; k < inner; ++k) {
    const double x = a[k * a_step];
    const double* r = b + k * ldb + j0;
    for (std::size_t j = 0; j < w; ++j) acc[j] += x * r[j];
  }
  std::copy(acc, acc + w, out + j0);
}

}  // namespace qctc::kernels::detail
