#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "qctc/numeric/kernels.hpp"
#include "row_kernels.hpp"

namespace qctc::kernels {

namespace {

void require(bool ok, const char* op) {
  if (!ok) throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}

}  // namespace

namespace parallel {

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(), "matmul");
  Tensor c(a.rows(), b.cols());
  const auto m = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    const auto r = static_cast<std::size_t>(i);
    detail::product_row(a.row(r).data(), 1, a.cols(), b.data().data(), b.cols(), b.cols(),
                        c.row(r).data());
  }
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.cols(), "matmul_nt");
  Tensor c(a.rows(), b.rows());
  const auto m = static_cast<std::int64_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    auto lhs = a.row(static_cast<std::size_t>(i));
    auto out = c.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto rhs = b.row(j);
      double acc = 0.0;
      for (std::size_t k = 0; k < lhs.size(); ++k) acc += lhs[k] * rhs[k];
      out[j] = acc;
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require(a.rows() == b.rows(), "matmul_tn");
  Tensor c(a.cols(), b.cols());
  const auto m = static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    const auto r = static_cast<std::size_t>(i);
    detail::product_row(a.data().data() + r, a.cols(), a.rows(), b.data().data(), b.cols(),
                        b.cols(), c.row(r).data());
  }
  return c;
}

Tensor softmax_rows(const Tensor& x) {
  Tensor y(x.rows(), x.cols());
  if (x.cols() == 0) return y;
  const auto m = static_cast<std::int64_t>(x.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    auto in = x.row(static_cast<std::size_t>(i));
    auto out = y.row(static_cast<std::size_t>(i));
    const double top = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      out[j] = std::exp(in[j] - top);
      total += out[j];
    }
    for (double& v : out) v /= total;
  }
  return y;
}

}  // namespace parallel

namespace {

bool go_parallel(std::size_t work) {
  return work >= kParallelWorkThreshold && omp_get_max_threads() > 1;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  return go_parallel(a.rows() * a.cols() * b.cols()) ? parallel::matmul(a, b)
                                                     : serial::matmul(a, b);
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  return go_parallel(a.rows() * a.cols() * b.rows()) ? parallel::matmul_nt(a, b)
                                                     : serial::matmul_nt(a, b);
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  return go_parallel(a.rows() * a.cols() * b.cols()) ? parallel::matmul_tn(a, b)
                                                     : serial::matmul_tn(a, b);
}

Tensor softmax_rows(const Tensor& x) {
  return go_parallel(x.size() * 8) ? parallel::softmax_rows(x) : serial::softmax_rows(x);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace qctc::kernels
