#include "qctc/numeric/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qctc/numeric/kernels.hpp"

namespace qctc::ad {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
                                "x" + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
}

Tensor transposed(const Tensor& a) {
  Tensor t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

template <typename Fn>
Tensor map(const Tensor& a, Fn fn) {
  Tensor out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = fn(a[i]);
  return out;
}

// Shared backward of the row softmax: dx = y * (g - <g, y>).
void softmax_backward(Tape& t, std::size_t self, std::size_t input) {
  if (!t.requires_grad(input)) return;
  const Tensor& y = t.value(self);
  const Tensor& g = t.grad(self);
  Tensor& dx = t.grad_slot(input);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < y.cols(); ++j) dot += g(i, j) * y(i, j);
    for (std::size_t j = 0; j < y.cols(); ++j) dx(i, j) += y(i, j) * (g(i, j) - dot);
  }
}

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    carry_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)

}  // namespace

Var matmul(Var a, Var b) {
  Tensor out = kernels::matmul(a.value(), b.value());
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, kernels::matmul_nt(g, t.value(ib)));
    if (t.requires_grad(ib)) t.accumulate(ib, kernels::matmul_tn(t.value(ia), g));
  });
}

Var matmul_nt(Var a, Var b) {
  Tensor out = kernels::matmul_nt(a.value(), b.value());
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, kernels::matmul(g, t.value(ib)));
    if (t.requires_grad(ib)) t.accumulate(ib, kernels::matmul_tn(g, t.value(ia)));
  });
}

Var transpose(Var a) {
  const auto ia = a.id();
  return a.tape().record(transposed(a.value()), {a}, [ia](Tape& t, std::size_t self) {
    t.accumulate(ia, transposed(t.grad(self)));
  });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  out.accumulate(b.value());
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    t.accumulate(ib, t.grad(self));
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    t.accumulate(ia, t.grad(self));
    if (t.requires_grad(ib)) {
      Tensor& db = t.grad_slot(ib);
      const Tensor& g = t.grad(self);
      for (std::size_t i = 0; i < g.size(); ++i) db[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ia)) {
      Tensor& da = t.grad_slot(ia);
      const Tensor& vb = t.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * vb[i];
    }
    if (t.requires_grad(ib)) {
      Tensor& db = t.grad_slot(ib);
      const Tensor& va = t.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * va[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = map(a.value(), [factor](double v) { return v * factor; });
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, factor](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    Tensor& da = t.grad_slot(ia);
    const Tensor& g = t.grad(self);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * factor;
  });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols())
    throw std::invalid_argument("add_row: expected a 1x" + std::to_string(a.cols()) + " row");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += row.value()(0, j);
  const auto ia = a.id(), ir = row.id();
  return a.tape().record(std::move(out), {a, row}, [ia, ir](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    t.accumulate(ia, g);
    if (t.requires_grad(ir)) {
      Tensor& dr = t.grad_slot(ir);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) dr(0, j) += g(i, j);
    }
  });
}

Var relu(Var a) {
  Tensor out = map(a.value(), [](double v) { return v > 0.0 ? v : 0.0; });
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    Tensor& da = t.grad_slot(ia);
    const Tensor& x = t.value(ia);
    const Tensor& g = t.grad(self);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x[i] > 0.0) da[i] += g[i];
  });
}

Var gelu(Var a) {
  Tensor out = map(a.value(), [](double x) {
    return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + 0.044715 * x * x * x)));
  });
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    Tensor& da = t.grad_slot(ia);
    const Tensor& x = t.value(ia);
    const Tensor& g = t.grad(self);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = x[i];
      const double th = std::tanh(kGeluC * (v + 0.044715 * v * v * v));
      const double dth = (1.0 - th * th) * kGeluC * (1.0 + 3.0 * 0.044715 * v * v);
      da[i] += g[i] * (0.5 * (1.0 + th) + 0.5 * v * dth);
    }
  });
}

Var sigmoid(Var a) {
  Tensor out = map(a.value(), [](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    Tensor& da = t.grad_slot(ia);
    const Tensor& y = t.value(self);
    const Tensor& g = t.grad(self);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * y[i] * (1.0 - y[i]);
  });
}

Var log_clamp(Var a, double epsilon) {
  Tensor out = map(a.value(), [epsilon](double x) { return std::log(std::max(x, epsilon)); });
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, epsilon](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    Tensor& da = t.grad_slot(ia);
    const Tensor& x = t.value(ia);
    const Tensor& g = t.grad(self);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x[i] > epsilon) da[i] += g[i] / x[i];
  });
}

Var softmax_rows(Var a) {
  for (double v : a.value().data())
    if (!std::isfinite(v)) throw std::invalid_argument("softmax_rows: non-finite input");
  const auto ia = a.id();
  return a.tape().record(kernels::softmax_rows(a.value()), {a},
                         [ia](Tape& t, std::size_t self) { softmax_backward(t, self, ia); });
}

Var masked_softmax_rows(Var a, const Mask& mask) {
  const Tensor& x = a.value();
  if (mask.rows != x.rows() || mask.cols != x.cols())
    throw std::invalid_argument("masked_softmax_rows: mask shape mismatch");
  Tensor y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < x.cols(); ++j)
      if (mask(i, j)) top = std::max(top, x(i, j));
    if (!std::isfinite(top)) throw std::invalid_argument("masked_softmax_rows: row fully masked");
    double total = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (!mask(i, j)) continue;
      y(i, j) = std::exp(x(i, j) - top);
      total += y(i, j);
    }
    for (std::size_t j = 0; j < x.cols(); ++j) y(i, j) /= total;
  }
  const auto ia = a.id();
  // Masked outputs are exactly zero, so the unmasked backward formula already
  // sends them zero gradient.
  return a.tape().record(std::move(y), {a},
                         [ia](Tape& t, std::size_t self) { softmax_backward(t, self, ia); });
}

Var geometry_weights(Var sg, Var sv) {
  require_same_shape(sg.value(), sv.value(), "geometry_weights");
  const Tensor& g = sg.value();
  const Tensor& v = sv.value();
  const std::size_t n = g.cols();
  Tensor alpha(g.rows(), n);
  for (std::size_t i = 0; i < g.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (g(i, j) < 0.0) throw std::invalid_argument("geometry_weights: negative geometry score");
    // Shift by the largest visual score among entries with positive geometry
    // weight so that the surviving terms cannot all underflow.
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (g(i, j) > 0.0) top = std::max(top, v(i, j));
    double total = 0.0;
    if (std::isfinite(top)) {
      for (std::size_t j = 0; j < n; ++j) {
        alpha(i, j) = g(i, j) * std::exp(v(i, j) - top);
        total += alpha(i, j);
      }
    }
    if (total > 0.0) {
      for (std::size_t j = 0; j < n; ++j) alpha(i, j) /= total;
    } else {
      for (std::size_t j = 0; j < n; ++j) alpha(i, j) = 1.0 / static_cast<double>(n);
    }
  }
  const auto ig = sg.id(), iv = sv.id();
  return sg.tape().record(std::move(alpha), {sg, sv}, [ig, iv](Tape& t, std::size_t self) {
    const Tensor& a = t.value(self);
    const Tensor& up = t.grad(self);
    const Tensor& gv = t.value(ig);
    const Tensor& vv = t.value(iv);
    const std::size_t n = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j)
        if (gv(i, j) > 0.0) top = std::max(top, vv(i, j));
      if (!std::isfinite(top)) continue;  // uniform fallback row
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += gv(i, j) * std::exp(vv(i, j) - top);
      if (!(total > 0.0)) continue;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += up(i, j) * a(i, j);
      if (t.requires_grad(iv)) {
        Tensor& dv = t.grad_slot(iv);
        for (std::size_t j = 0; j < n; ++j) dv(i, j) += a(i, j) * (up(i, j) - dot);
      }
      if (t.requires_grad(ig)) {
        Tensor& dg = t.grad_slot(ig);
        for (std::size_t j = 0; j < n; ++j)
          dg(i, j) += std::exp(vv(i, j) - top) / total * (up(i, j) - dot);
      }
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no operands");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("concat_rows: column mismatch");
    rows += p.rows();
  }
  Tensor out(rows, cols);
  std::size_t offset = 0;
  std::vector<std::size_t> ids;
  for (const Var& p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(), out.data().begin() + offset);
    offset += p.value().size();
    ids.push_back(p.id());
  }
  return parts.front().tape().record(std::move(out), parts, [ids](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    std::size_t offset = 0;
    for (std::size_t id : ids) {
      const std::size_t len = t.value(id).size();
      if (t.requires_grad(id)) {
        Tensor& d = t.grad_slot(id);
        for (std::size_t k = 0; k < len; ++k) d[k] += g[offset + k];
      }
      offset += len;
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no operands");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::size_t offset = 0;
  std::vector<std::size_t> ids;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < v.cols(); ++j) out(i, offset + j) = v(i, j);
    offset += v.cols();
    ids.push_back(p.id());
  }
  return parts.front().tape().record(std::move(out), parts, [ids](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    std::size_t offset = 0;
    for (std::size_t id : ids) {
      const std::size_t width = t.value(id).cols();
      if (t.requires_grad(id)) {
        Tensor& d = t.grad_slot(id);
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < width; ++j) d(i, j) += g(i, offset + j);
      }
      offset += width;
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  if (begin + count > a.rows()) throw std::invalid_argument("slice_rows: out of range");
  const std::size_t cols = a.cols();
  const auto first = a.value().data().begin() + static_cast<std::ptrdiff_t>(begin * cols);
  Tensor out(count, cols, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(count * cols)));
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, begin, cols](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad(self);
    Tensor& d = t.grad_slot(ia);
    for (std::size_t k = 0; k < g.size(); ++k) d[begin * cols + k] += g[k];
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count) {
  if (begin + count > a.cols()) throw std::invalid_argument("slice_cols: out of range");
  const Tensor& v = a.value();
  Tensor out(v.rows(), count);
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = v(i, begin + j);
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia, begin](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad(self);
    Tensor& d = t.grad_slot(ia);
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) d(i, begin + j) += g(i, j);
  });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  const Tensor& v = a.value();
  Tensor out(rows.size(), v.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= v.rows())
      throw std::invalid_argument("gather_rows: index " + std::to_string(rows[r]) +
                                  " out of range for " + std::to_string(v.rows()) + " rows");
    std::copy(v.row(rows[r]).begin(), v.row(rows[r]).end(), out.row(r).begin());
  }
  const auto ia = a.id();
  std::vector<std::size_t> index(rows.begin(), rows.end());
  return a.tape().record(std::move(out), {a}, [ia, index](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad(self);
    Tensor& d = t.grad_slot(ia);
    for (std::size_t r = 0; r < index.size(); ++r)
      for (std::size_t j = 0; j < g.cols(); ++j) d(index[r], j) += g(r, j);
  });
}

Var reshape(Var a, std::size_t rows, std::size_t cols) {
  if (rows * cols != a.value().size()) throw std::invalid_argument("reshape: size mismatch");
  std::vector<double> data(a.value().data().begin(), a.value().data().end());
  const auto ia = a.id();
  return a.tape().record(Tensor(rows, cols, std::move(data)), {a}, [ia](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& g = t.grad(self);
    Tensor& d = t.grad_slot(ia);
    for (std::size_t k = 0; k < g.size(); ++k) d[k] += g[k];
  });
}

Var layer_norm(Var x, Var gain, Var bias, double epsilon) {
  const Tensor& v = x.value();
  const std::size_t n = v.cols();
  if (gain.rows() != 1 || gain.cols() != n || bias.rows() != 1 || bias.cols() != n)
    throw std::invalid_argument("layer_norm: gain/bias must be 1x" + std::to_string(n));
  Tensor normed(v.rows(), n);
  std::vector<double> inv_std(v.rows());
  for (std::size_t i = 0; i < v.rows(); ++i) {
    double mean = 0.0;
    for (double e : v.row(i)) mean += e;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double e : v.row(i)) var += (e - mean) * (e - mean);
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + epsilon);
    for (std::size_t j = 0; j < n; ++j) normed(i, j) = (v(i, j) - mean) * inv_std[i];
  }
  Tensor out(v.rows(), n);
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < n; ++j)
      out(i, j) = normed(i, j) * gain.value()(0, j) + bias.value()(0, j);
  const auto ix = x.id(), ig = gain.id(), ib = bias.id();
  return x.tape().record(
      std::move(out), {x, gain, bias},
      [ix, ig, ib, normed = std::move(normed), inv_std = std::move(inv_std)](Tape& t,
                                                                            std::size_t self) {
        const Tensor& g = t.grad(self);
        const Tensor& gv = t.value(ig);
        const std::size_t n = g.cols();
        if (t.requires_grad(ig) || t.requires_grad(ib)) {
          Tensor dgain(1, n), dbias(1, n);
          for (std::size_t i = 0; i < g.rows(); ++i)
            for (std::size_t j = 0; j < n; ++j) {
              dgain(0, j) += g(i, j) * normed(i, j);
              dbias(0, j) += g(i, j);
            }
          t.accumulate(ig, dgain);
          t.accumulate(ib, dbias);
        }
        if (!t.requires_grad(ix)) return;
        Tensor& dx = t.grad_slot(ix);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < g.rows(); ++i) {
          double mean_dn = 0.0, mean_dn_n = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            const double dn = g(i, j) * gv(0, j);
            mean_dn += dn;
            mean_dn_n += dn * normed(i, j);
          }
          mean_dn *= inv_n;
          mean_dn_n *= inv_n;
          for (std::size_t j = 0; j < n; ++j) {
            const double dn = g(i, j) * gv(0, j);
            dx(i, j) += inv_std[i] * (dn - mean_dn - normed(i, j) * mean_dn_n);
          }
        }
      });
}

Var linear(Var x, Var weight, Var bias) {
  const Tensor& b = bias.value();
  if (b.rows() != 1 || b.cols() != weight.cols())
    throw std::invalid_argument("linear: expected a 1x" + std::to_string(weight.cols()) + " bias");
  Tensor out = kernels::matmul(x.value(), weight.value());
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b(0, j);
  const auto ix = x.id(), iw = weight.id(), ib = bias.id();
  return x.tape().record(std::move(out), {x, weight, bias}, [ix, iw, ib](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (t.requires_grad(ix)) t.accumulate(ix, kernels::matmul_nt(g, t.value(iw)));
    if (t.requires_grad(iw)) t.accumulate(iw, kernels::matmul_tn(t.value(ix), g));
    if (t.requires_grad(ib)) {
      Tensor& db = t.grad_slot(ib);
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) db(0, j) += g(i, j);
    }
  });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  const auto ia = a.id();
  return a.tape().record(Tensor(1, 1, total), {a}, [ia](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const double g = t.grad(self)[0];
    Tensor& d = t.grad_slot(ia);
    for (double& v : d.data()) v += g;
  });
}

Var binary_cross_entropy(Var probs, const Tensor& targets, bool literal) {
  require_same_shape(probs.value(), targets, "binary_cross_entropy");
  const Tensor& p = probs.value();
  constexpr double lo = kProbabilityClamp;
  constexpr double hi = 1.0 - kProbabilityClamp;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], lo, hi);
    const double y = targets[i];
    total -= y * std::log(q);
    if (!literal) total -= (1.0 - y) * std::log(1.0 - q);
  }
  const auto ip = probs.id();
  return probs.tape().record(
      Tensor(1, 1, total), {probs}, [ip, targets, literal](Tape& t, std::size_t self) {
        if (!t.requires_grad(ip)) return;
        const double up = t.grad(self)[0];
        const Tensor& p = t.value(ip);
        Tensor& d = t.grad_slot(ip);
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (p[i] < lo || p[i] > hi) continue;
          const double y = targets[i];
          double g = -y / p[i];
          if (!literal) g += (1.0 - y) / (1.0 - p[i]);
          d[i] += up * g;
        }
      });
}

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var binary_cross_entropy_logits(Var logits, const Tensor& targets, bool literal) {
  require_same_shape(logits.value(), targets, "binary_cross_entropy_logits");
  const Tensor& x = logits.value();
  const double bound = std::log((1.0 - kProbabilityClamp) / kProbabilityClamp);
  CompensatedSum total;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = std::clamp(x[i], -bound, bound);
    const double y = targets[i];
    total.add(y * softplus(-z));
    if (!literal) total.add((1.0 - y) * softplus(z));
  }
  const auto ix = logits.id();
  return logits.tape().record(
      Tensor(1, 1, total.value()), {logits}, [ix, targets, literal, bound](Tape& t, std::size_t self) {
        if (!t.requires_grad(ix)) return;
        const double up = t.grad(self)[0];
        const Tensor& x = t.value(ix);
        Tensor& d = t.grad_slot(ix);
        for (std::size_t i = 0; i < x.size(); ++i) {
          if (x[i] < -bound || x[i] > bound) continue;
          const double y = targets[i];
          d[i] += up * (literal ? -y * stable_sigmoid(-x[i]) : stable_sigmoid(x[i]) - y);
        }
      });
}

Attention scaled_dot_attention(Var q, Var k, Var v, double scale_factor, const Mask* mask) {
  Var scores = scale(matmul_nt(q, k), scale_factor);
  Var weights = mask ? masked_softmax_rows(scores, *mask) : softmax_rows(scores);
  return {matmul(weights, v), weights};
}

}  // namespace qctc::ad
