#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

// Captioning metrics on the 0-100 scale. All text is tokenized with
// qctc::text::tokenize before scoring.
namespace qctc::metrics {

struct EvalPair {
  std::string id;
  std::string candidate;
  std::vector<std::string> references;
  std::vector<std::string> answers;  // may be empty
  std::string group_id;              // image id, used for diversity
};

using Tokens = std::vector<std::string>;

// Corpus BLEU-n: clipped n-gram precisions pooled over the corpus, geometric
// mean, brevity penalty against the closest reference length.
double bleu(const std::vector<EvalPair>& corpus, int n);

inline constexpr double kRougeBeta = 1.2;
double rouge_l(const std::vector<EvalPair>& corpus);
std::size_t lcs_length(const Tokens& a, const Tokens& b);

// Document frequencies over a reference corpus, one document per entry.
class CiderIdf {
 public:
  static constexpr int kMaxN = 4;
  explicit CiderIdf(const std::vector<std::vector<Tokens>>& documents);

  double idf(const Tokens& ngram) const;
  std::size_t documents() const { return documents_; }

 private:
  std::size_t documents_ = 0;
  std::map<Tokens, std::size_t> df_;
};

inline constexpr double kCiderSigma = 6.0;

// Per-order CIDEr-D similarity, averaged over n = 1..4, without the x10.
double cider_similarity(const Tokens& candidate, const Tokens& reference, const CiderIdf& idf);

// Mean over pairs of 10 x similarity averaged over references.
double cider_raw(const std::vector<EvalPair>& corpus);
// cider_raw on the report scale (x100).
double cider(const std::vector<EvalPair>& corpus);

// Mean over pairs with answers of the share of distinct answer tokens found
// in the candidate. Absent when no pair carries answers.
std::optional<double> ans_recall(const std::vector<EvalPair>& corpus);

// Distinct n-grams over total words per caption set, averaged over sets
// with at least two captions. Absent when there is no such set.
std::optional<double> div_n(const std::vector<std::vector<std::string>>& caption_sets, int n);

// SVD spread of a symmetric similarity kernel: -log(s1 / sum s) / log M, x100.
double kernel_diversity(const std::vector<std::vector<double>>& kernel);

// Kernel of pairwise CIDEr-D similarities within each set, divided by the
// geometric mean of the two self-similarities (diagonal 1, and 1 for
// identical captions). IDF is taken over
// all sets; averaged over sets with at least two captions.
std::optional<double> self_cider(const std::vector<std::vector<std::string>>& caption_sets);

struct MetricReport {
  double bleu[4] = {0, 0, 0, 0};
  double rouge_l = 0;
  double cider = 0;
  std::optional<double> ans_recall;
  std::optional<double> div1, div2, self_cider;
  // METEOR and SPICE are never computed; they appear as absent.
};

// Candidates grouped by group_id (falling back to id) feed the diversity
// scores.
MetricReport evaluate(const std::vector<EvalPair>& corpus);

std::string report_json(const MetricReport& r);
std::string report_table(const MetricReport& r);

std::vector<EvalPair> read_eval_pairs(std::istream& in);

}  // namespace qctc::metrics
