#include "oracles.hpp"

#include <cmath>

namespace qctc::oracle {

namespace {

const Tensor& value(const ParameterSet& ps, const std::string& name) {
  return ps.at(name).value;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor out = matmul(x, w);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b(0, j);
  return out;
}

double gelu(double x) {
  const double c = std::sqrt(2.0 / 3.14159265358979323846);
  return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  Tensor out(x.rows(), x.cols());
  const double n = static_cast<double>(x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) mean += x(i, j);
    mean /= n;
    double var = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) var += (x(i, j) - mean) * (x(i, j) - mean);
    var /= n;
    for (std::size_t j = 0; j < x.cols(); ++j)
      out(i, j) = (x(i, j) - mean) / std::sqrt(var + eps) * gain(0, j) + bias(0, j);
  }
  return out;
}

GeometryLayerResult geometry_layer(const ParameterSet& ps, const std::string& prefix,
                                   std::size_t heads, const Tensor& v,
                                   const std::vector<BoundingBox>& boxes) {
  const std::size_t n = v.rows(), d = v.cols(), dh = d / heads;
  GeometryLayerResult r;
  Tensor concat(n, heads * d);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::string p = prefix + ".h" + std::to_string(h);
    const Tensor& wg = value(ps, p + ".wg");
    const Tensor& wq = value(ps, p + ".wq");
    const Tensor& wk = value(ps, p + ".wk");
    Tensor sg(n, n), alpha(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> num(n);
      double den = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double dx = std::abs(boxes[i].cx - boxes[j].cx) / boxes[i].w;
        const double dy = std::abs(boxes[i].cy - boxes[j].cy) / boxes[i].h;
        const double g[4] = {std::log(dx < 1e-3 ? 1e-3 : dx), std::log(dy < 1e-3 ? 1e-3 : dy),
                             std::log(boxes[j].w / boxes[i].w), std::log(boxes[j].h / boxes[i].h)};
        double gs = 0.0;
        for (int k = 0; k < 4; ++k) gs += g[k] * wg(k, 0);
        sg(i, j) = gs > 0.0 ? gs : 0.0;
        double sv = 0.0;
        for (std::size_t c = 0; c < dh; ++c) {
          double q = 0.0, key = 0.0;
          for (std::size_t e = 0; e < d; ++e) {
            q += v(i, e) * wq(e, c);
            key += v(j, e) * wk(e, c);
          }
          sv += q * key;
        }
        sv /= std::sqrt(static_cast<double>(dh));
        num[j] = sg(i, j) * std::exp(sv);
        den += num[j];
      }
      for (std::size_t j = 0; j < n; ++j)
        alpha(i, j) = den > 0.0 ? num[j] / den : 1.0 / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t e = 0; e < d; ++e) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += alpha(i, j) * v(j, e);
        concat(i, h * d + e) = s;
      }
    r.geometry_scores.push_back(sg);
    r.weights.push_back(alpha);
  }
  Tensor proj = linear(concat, value(ps, prefix + ".out.w"), value(ps, prefix + ".out.b"));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = 0; e < d; ++e) proj(i, e) += v(i, e);
  r.states = layer_norm(proj, value(ps, prefix + ".ln.gain"), value(ps, prefix + ".ln.bias"));
  return r;
}

QuestionAttentionResult question_attention(const Tensor& wq, const Tensor& wk, const Tensor& wv,
                                           const Tensor& wt, const Tensor& question,
                                           const Tensor& visual, bool scaled) {
  const std::size_t nq = question.rows(), n = visual.rows(), d = question.cols();
  QuestionAttentionResult r{Tensor(nq, wv.cols()), Tensor(nq, n)};
  const Tensor tq = matmul(question, wq);
  const Tensor vk = matmul(visual, wk);
  for (std::size_t i = 0; i < nq; ++i) {
    std::vector<double> e(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < tq.cols(); ++c) s += tq(i, c) * vk(j, c);
      if (scaled) s /= std::sqrt(static_cast<double>(d));
      e[j] = std::exp(s);
      total += e[j];
    }
    for (std::size_t j = 0; j < n; ++j) r.beta(i, j) = e[j] / total;
    std::vector<double> tv(d, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < d; ++c) tv[c] += r.beta(i, j) * visual(j, c);
    for (std::size_t o = 0; o < wv.cols(); ++o) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += tv[c] * wv(c, o) + question(i, c) * wt(c, o);
      r.tokens(i, o) = s;
    }
  }
  return r;
}

Tensor pointer_scores(const Tensor& fc_w, const Tensor& fc_b, const Tensor& wd, const Tensor& bd,
                      const Tensor& wo, const Tensor& bo, const Tensor& z_dec,
                      const Tensor& z_ocr) {
  const std::size_t vsize = fc_w.cols(), nocr = z_ocr.rows();
  Tensor out(z_dec.rows(), vsize + nocr);
  for (std::size_t t = 0; t < z_dec.rows(); ++t) {
    for (std::size_t v = 0; v < vsize; ++v) {
      double s = fc_b(0, v);
      for (std::size_t c = 0; c < fc_w.rows(); ++c) s += z_dec(t, c) * fc_w(c, v);
      out(t, v) = s;
    }
    for (std::size_t k = 0; k < nocr; ++k) {
      double s = 0.0;
      for (std::size_t o = 0; o < wd.cols(); ++o) {
        double a = bd(0, o), b = bo(0, o);
        for (std::size_t c = 0; c < wd.rows(); ++c) {
          a += z_dec(t, c) * wd(c, o);
          b += z_ocr(k, c) * wo(c, o);
        }
        s += a * b;
      }
      out(t, vsize + k) = s;
    }
  }
  return out;
}

Tensor transformer_layer(const ParameterSet& ps, const std::string& prefix, std::size_t heads,
                         const Tensor& x, const ad::Mask* mask) {
  auto lin = [&](const std::string& name, const Tensor& in) {
    const std::string w = prefix + "." + name + ".w", b = prefix + "." + name + ".b";
    return ps.contains(b) ? linear(in, value(ps, w), value(ps, b)) : matmul(in, value(ps, w));
  };
  const std::size_t n = x.rows(), d = x.cols(), dh = d / heads;
  const Tensor q = lin("q", x), k = lin("k", x), v = lin("v", x);
  Tensor concat(n, d);
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> e(n, 0.0);
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (mask && !(*mask)(i, j)) continue;
        double s = 0.0;
        for (std::size_t c = 0; c < dh; ++c) s += q(i, h * dh + c) * k(j, h * dh + c);
        e[j] = std::exp(s / std::sqrt(static_cast<double>(dh)));
        total += e[j];
      }
      for (std::size_t c = 0; c < dh; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += e[j] / total * v(j, h * dh + c);
        concat(i, h * dh + c) = s;
      }
    }
  Tensor h1 = lin("o", concat);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) h1(i, c) += x(i, c);
  h1 = layer_norm(h1, value(ps, prefix + ".ln1.gain"), value(ps, prefix + ".ln1.bias"));
  Tensor ff = lin("ffn1", h1);
  for (std::size_t i = 0; i < ff.rows(); ++i)
    for (std::size_t c = 0; c < ff.cols(); ++c) ff(i, c) = gelu(ff(i, c));
  Tensor h2 = lin("ffn2", ff);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) h2(i, c) += h1(i, c);
  return layer_norm(h2, value(ps, prefix + ".ln2.gain"), value(ps, prefix + ".ln2.bias"));
}

}  // namespace qctc::oracle
