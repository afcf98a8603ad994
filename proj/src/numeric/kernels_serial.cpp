#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qctc/numeric/kernels.hpp"
#include "row_kernels.hpp"

namespace qctc::kernels::serial {

namespace {

void require(bool ok, const char* op, const Tensor& a, const Tensor& b) {
  if (!ok) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(), "matmul", a, b);
  Tensor c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    detail::product_row(a.row(i).data(), 1, a.cols(), b.data().data(), b.cols(), b.cols(),
                        c.row(i).data());
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.cols(), "matmul_nt", a, b);
  Tensor c(a.rows(), b.rows());
  const std::size_t inner = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* __restrict lhs = a.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* __restrict rhs = b.row(j).data();
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += lhs[k] * rhs[k];
      c(i, j) = acc;
    }
  }
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require(a.rows() == b.rows(), "matmul_tn", a, b);
  Tensor c(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    detail::product_row(a.data().data() + i, a.cols(), a.rows(), b.data().data(), b.cols(),
                        b.cols(), c.row(i).data());
  return c;
}

Tensor softmax_rows(const Tensor& x) {
  Tensor y(x.rows(), x.cols());
  if (x.cols() == 0) return y;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto in = x.row(i);
    auto out = y.row(i);
    const double m = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) {
      out[j] = std::exp(in[j] - m);
      total += out[j];
    }
    for (double& v : out) v /= total;
  }
  return y;
}

}  // namespace qctc::kernels::serial
