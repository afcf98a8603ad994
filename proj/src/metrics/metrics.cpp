#include "qctc/metrics/metrics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "qctc/text/normalize.hpp"

namespace qctc::metrics {

namespace {

using NgramCounts = std::map<Tokens, std::size_t>;

NgramCounts ngrams(const Tokens& t, int n) {
  NgramCounts out;
  const auto k = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + k <= t.size(); ++i) ++out[Tokens(t.begin() + i, t.begin() + i + k)];
  return out;
}

void require_nonempty(const std::vector<EvalPair>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("empty evaluation corpus");
  for (const auto& p : corpus)
    if (p.references.empty()) throw std::invalid_argument("pair '" + p.id + "' has no reference");
}

std::vector<Tokens> tokenized(const std::vector<std::string>& s) {
  std::vector<Tokens> out;
  out.reserve(s.size());
  for (const auto& x : s) out.push_back(text::tokenize(x));
  return out;
}

struct BleuStats {
  double matched[4] = {0, 0, 0, 0};
  double total[4] = {0, 0, 0, 0};
  double cand_len = 0, ref_len = 0;
};

BleuStats bleu_stats(const EvalPair& p, int n) {
  BleuStats s;
  const Tokens c = text::tokenize(p.candidate);
  const auto refs = tokenized(p.references);
  s.cand_len = static_cast<double>(c.size());
  // Closest reference length, shorter on ties.
  std::size_t best = refs[0].size();
  for (const auto& r : refs) {
    const auto d = [&](std::size_t len) { return len > c.size() ? len - c.size() : c.size() - len; };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
  }
  s.ref_len = static_cast<double>(best);
  for (int k = 1; k <= n; ++k) {
    const NgramCounts cc = ngrams(c, k);
    NgramCounts max_ref;
    for (const auto& r : refs)
      for (const auto& [g, cnt] : ngrams(r, k)) max_ref[g] = std::max(max_ref[g], cnt);
    for (const auto& [g, cnt] : cc) {
      s.total[k - 1] += static_cast<double>(cnt);
      const auto it = max_ref.find(g);
      if (it != max_ref.end()) s.matched[k - 1] += static_cast<double>(std::min(cnt, it->second));
    }
  }
  return s;
}

struct CiderVec {
  std::map<Tokens, double> v[CiderIdf::kMaxN];
  double norm[CiderIdf::kMaxN] = {0, 0, 0, 0};
  std::size_t length = 0;
};

CiderVec cider_vec(const Tokens& t, const CiderIdf& idf) {
  CiderVec out;
  out.length = t.size();
  for (int n = 1; n <= CiderIdf::kMaxN; ++n) {
    for (const auto& [g, cnt] : ngrams(t, n)) {
      const double w = static_cast<double>(cnt) * idf.idf(g);
      out.v[n - 1][g] = w;
      out.norm[n - 1] += w * w;
    }
    out.norm[n - 1] = std::sqrt(out.norm[n - 1]);
  }
  return out;
}

double cider_sim(const CiderVec& c, const CiderVec& r) {
  const double delta = static_cast<double>(c.length) - static_cast<double>(r.length);
  const double penalty = std::exp(-(delta * delta) / (2.0 * kCiderSigma * kCiderSigma));
  double total = 0.0;
  for (int n = 0; n < CiderIdf::kMaxN; ++n) {
    double val = 0.0;
    for (const auto& [g, w] : c.v[n]) {
      const auto it = r.v[n].find(g);
      if (it != r.v[n].end()) val += std::min(w, it->second) * it->second;
    }
    if (c.norm[n] != 0.0 && r.norm[n] != 0.0) val /= c.norm[n] * r.norm[n];
    total += val * penalty;
  }
  return total / CiderIdf::kMaxN;
}

std::vector<std::vector<std::string>> groups_of(const std::vector<EvalPair>& corpus) {
  std::map<std::string, std::vector<std::string>> by_group;
  for (const auto& p : corpus) by_group[p.group_id.empty() ? p.id : p.group_id].push_back(p.candidate);
  std::vector<std::vector<std::string>> out;
  for (auto& [g, c] : by_group) out.push_back(std::move(c));
  return out;
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

double bleu(const std::vector<EvalPair>& corpus, int n) {
  if (n < 1 || n > 4) throw std::invalid_argument("BLEU order must be 1..4");
  require_nonempty(corpus);
  std::vector<BleuStats> per(corpus.size());
  const auto m = static_cast<std::ptrdiff_t>(corpus.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < m; ++i) per[static_cast<std::size_t>(i)] = bleu_stats(corpus[static_cast<std::size_t>(i)], n);

  BleuStats sum;
  for (const auto& s : per) {
    for (int k = 0; k < n; ++k) {
      sum.matched[k] += s.matched[k];
      sum.total[k] += s.total[k];
    }
    sum.cand_len += s.cand_len;
    sum.ref_len += s.ref_len;
  }
  if (sum.cand_len == 0.0) return 0.0;
  double log_p = 0.0;
  for (int k = 0; k < n; ++k) {
    if (sum.matched[k] == 0.0) return 0.0;
    log_p += std::log(sum.matched[k] / sum.total[k]);
  }
  const double bp = sum.cand_len >= sum.ref_len ? 1.0 : std::exp(1.0 - sum.ref_len / sum.cand_len);
  return 100.0 * bp * std::exp(log_p / n);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const std::vector<EvalPair>& corpus) {
  require_nonempty(corpus);
  std::vector<double> per(corpus.size(), 0.0);
  const auto m = static_cast<std::ptrdiff_t>(corpus.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    const auto& p = corpus[static_cast<std::size_t>(i)];
    const Tokens c = text::tokenize(p.candidate);
    if (c.empty()) continue;
    double prec = 0.0, rec = 0.0;
    for (const auto& r : tokenized(p.references)) {
      if (r.empty()) continue;
      const auto l = static_cast<double>(lcs_length(c, r));
      prec = std::max(prec, l / static_cast<double>(c.size()));
      rec = std::max(rec, l / static_cast<double>(r.size()));
    }
    const double b2 = kRougeBeta * kRougeBeta;
    if (prec > 0.0 && rec > 0.0) per[static_cast<std::size_t>(i)] = (1.0 + b2) * prec * rec / (rec + b2 * prec);
  }
  double sum = 0.0;
  for (double v : per) sum += v;
  return 100.0 * sum / static_cast<double>(corpus.size());
}

CiderIdf::CiderIdf(const std::vector<std::vector<Tokens>>& documents) : documents_(documents.size()) {
  for (const auto& doc : documents) {
    std::set<Tokens> seen;
    for (const auto& t : doc)
      for (int n = 1; n <= kMaxN; ++n)
        for (const auto& [g, cnt] : ngrams(t, n)) seen.insert(g);
    for (const auto& g : seen) ++df_[g];
  }
}

double CiderIdf::idf(const Tokens& ngram) const {
  const auto it = df_.find(ngram);
  const double df = it == df_.end() ? 1.0 : static_cast<double>(it->second);
  return std::log(static_cast<double>(documents_)) - std::log(df);
}

double cider_similarity(const Tokens& candidate, const Tokens& reference, const CiderIdf& idf) {
  return cider_sim(cider_vec(candidate, idf), cider_vec(reference, idf));
}

double cider_raw(const std::vector<EvalPair>& corpus) {
  require_nonempty(corpus);
  std::vector<std::vector<Tokens>> docs;
  docs.reserve(corpus.size());
  for (const auto& p : corpus) docs.push_back(tokenized(p.references));
  const CiderIdf idf(docs);

  std::vector<double> per(corpus.size(), 0.0);
  const auto m = static_cast<std::ptrdiff_t>(corpus.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const CiderVec c = cider_vec(text::tokenize(corpus[u].candidate), idf);
    double s = 0.0;
    for (const auto& r : docs[u]) s += cider_sim(c, cider_vec(r, idf));
    per[u] = 10.0 * s / static_cast<double>(docs[u].size());
  }
  double sum = 0.0;
  for (double v : per) sum += v;
  return sum / static_cast<double>(corpus.size());
}

double cider(const std::vector<EvalPair>& corpus) { return 100.0 * cider_raw(corpus); }

std::optional<double> ans_recall(const std::vector<EvalPair>& corpus) {
  double sum = 0.0;
  std::size_t scored = 0;
  for (const auto& p : corpus) {
    std::set<std::string> answer;
    for (const auto& a : p.answers)
      for (auto& t : text::tokenize(a)) answer.insert(std::move(t));
    if (answer.empty()) continue;
    const Tokens c = text::tokenize(p.candidate);
    const std::set<std::string> present(c.begin(), c.end());
    std::size_t hit = 0;
    for (const auto& t : answer) hit += present.count(t);
    sum += static_cast<double>(hit) / static_cast<double>(answer.size());
    ++scored;
  }
  if (scored == 0) return std::nullopt;
  return 100.0 * sum / static_cast<double>(scored);
}

std::optional<double> div_n(const std::vector<std::vector<std::string>>& caption_sets, int n) {
  if (n < 1) throw std::invalid_argument("Div-n order must be positive");
  double sum = 0.0;
  std::size_t scored = 0;
  for (const auto& set : caption_sets) {
    if (set.size() < 2) continue;
    std::set<Tokens> distinct;
    std::size_t words = 0;
    for (const auto& t : tokenized(set)) {
      words += t.size();
      for (const auto& [g, cnt] : ngrams(t, n)) distinct.insert(g);
    }
    ++scored;
    if (words > 0) sum += static_cast<double>(distinct.size()) / static_cast<double>(words);
  }
  if (scored == 0) return std::nullopt;
  return 100.0 * sum / static_cast<double>(scored);
}

double kernel_diversity(const std::vector<std::vector<double>>& kernel) {
  const std::size_t m = kernel.size();
  if (m < 2) throw std::invalid_argument("diversity kernel needs at least two captions");
  Eigen::MatrixXd k(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    if (kernel[i].size() != m) throw std::invalid_argument("diversity kernel must be square");
    for (std::size_t j = 0; j < m; ++j) k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kernel[i][j];
  }
  const Eigen::VectorXd s = Eigen::JacobiSVD<Eigen::MatrixXd>(k).singularValues();
  const double total = s.sum();
  if (total <= 0.0) throw std::invalid_argument("diversity kernel is zero");
  const double score = -std::log(s.maxCoeff() / total) / std::log(static_cast<double>(m));
  return 100.0 * std::clamp(score, 0.0, 1.0);
}

std::optional<double> self_cider(const std::vector<std::vector<std::string>>& caption_sets) {
  std::vector<std::vector<Tokens>> docs;
  for (const auto& set : caption_sets) docs.push_back(tokenized(set));
  const CiderIdf idf(docs);
  double sum = 0.0;
  std::size_t scored = 0;
  for (const auto& doc : docs) {
    const std::size_t m = doc.size();
    if (m < 2) continue;
    std::vector<CiderVec> vecs;
    for (const auto& t : doc) vecs.push_back(cider_vec(t, idf));
    std::vector<double> self(m);
    for (std::size_t i = 0; i < m; ++i) self[i] = cider_sim(vecs[i], vecs[i]);
    std::vector<std::vector<double>> kernel(m, std::vector<double>(m, 1.0));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        const double d = std::sqrt(self[i] * self[j]);
        double k = d > 0.0 ? cider_sim(vecs[i], vecs[j]) / d : 0.0;
        if (doc[i] == doc[j]) k = 1.0;
        kernel[i][j] = kernel[j][i] = k;
      }
    sum += kernel_diversity(kernel);
    ++scored;
  }
  if (scored == 0) return std::nullopt;
  return sum / static_cast<double>(scored);
}

MetricReport evaluate(const std::vector<EvalPair>& corpus) {
  MetricReport r;
  for (int n = 1; n <= 4; ++n) r.bleu[n - 1] = bleu(corpus, n);
  r.rouge_l = rouge_l(corpus);
  r.cider = cider(corpus);
  r.ans_recall = ans_recall(corpus);
  const auto groups = groups_of(corpus);
  r.div1 = div_n(groups, 1);
  r.div2 = div_n(groups, 2);
  r.self_cider = self_cider(groups);
  return r;
}

std::string report_json(const MetricReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  const nlohmann::json j = {{"BLEU1", r.bleu[0]},  {"BLEU2", r.bleu[1]},     {"BLEU3", r.bleu[2]},
                            {"BLEU4", r.bleu[3]},  {"METEOR", nullptr},      {"ROUGE-L", r.rouge_l},
                            {"CIDEr", r.cider},    {"SPICE", nullptr},       {"AnsRecall", opt(r.ans_recall)},
                            {"Div-1", opt(r.div1)}, {"Div-2", opt(r.div2)}, {"SelfCIDEr", opt(r.self_cider)}};
  return j.dump(2);
}

std::string report_table(const MetricReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? fixed(*v) : std::string("-"); };
  const std::vector<std::pair<std::string, std::string>> cols = {
      {"BLEU1", fixed(r.bleu[0])}, {"BLEU2", fixed(r.bleu[1])},   {"BLEU3", fixed(r.bleu[2])},
      {"BLEU4", fixed(r.bleu[3])}, {"METEOR", "-"},               {"ROUGE-L", fixed(r.rouge_l)},
      {"CIDEr", fixed(r.cider)},   {"SPICE", "-"},                {"AnsRecall", opt(r.ans_recall)},
      {"Div-1", opt(r.div1)},      {"Div-2", opt(r.div2)},        {"SelfCIDEr", opt(r.self_cider)}};
  std::string head, row;
  for (const auto& [name, value] : cols) {
    const std::size_t w = std::max(name.size(), value.size()) + 2;
    head += name + std::string(w - name.size(), ' ');
    row += value + std::string(w - value.size(), ' ');
  }
  while (!head.empty() && head.back() == ' ') head.pop_back();
  while (!row.empty() && row.back() == ' ') row.pop_back();
  return head + "\n" + row + "\n";
}

std::vector<EvalPair> read_eval_pairs(std::istream& in) {
  std::vector<EvalPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EvalPair p;
      p.id = j.value("id", std::to_string(line_no));
      p.candidate = j.at("candidate").get<std::string>();
      p.references = j.at("references").get<std::vector<std::string>>();
      if (p.references.empty()) throw std::invalid_argument("no reference");
      if (j.contains("answers")) p.answers = j.at("answers").get<std::vector<std::string>>();
      p.group_id = j.value("group_id", std::string());
      out.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw std::invalid_argument("evaluation line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qctc::metrics
