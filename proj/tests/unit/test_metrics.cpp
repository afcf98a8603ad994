#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "metric_oracles.hpp"
#include "qctc/metrics/metrics.hpp"
#include "qctc/text/normalize.hpp"

using namespace qctc;
using namespace qctc::metrics;

namespace {

EvalPair pair(std::string cand, std::vector<std::string> refs, std::vector<std::string> answers = {}) {
  EvalPair p;
  p.id = cand;
  p.candidate = std::move(cand);
  p.references = std::move(refs);
  p.answers = std::move(answers);
  return p;
}

std::string random_sentence(std::mt19937_64& rng, std::size_t vocab) {
  const std::size_t len = 1 + rng() % 6;
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s += (i ? " w" : "w") + std::to_string(rng() % vocab);
  return s;
}

}  // namespace

TEST_CASE("BLEU") {
  CHECK(bleu({pair("a sign says open", {"a sign says open"})}, 1) == doctest::Approx(100.0));
  CHECK(bleu({pair("a sign says open", {"a sign says open"})}, 4) == doctest::Approx(100.0));
  CHECK(bleu({pair("x y", {"a b"})}, 1) == 0.0);
  CHECK(bleu({pair("a b c", {"a b d"})}, 1) == doctest::Approx(200.0 / 3));
  // Clipping: "the the the" against "the cat" keeps one match of three.
  // Brevity: candidate 3 words, closest reference 2, so no penalty.
  CHECK(bleu({pair("the the the", {"the cat"})}, 1) == doctest::Approx(100.0 / 3));
  // Short candidate: p1 = 1, BP = exp(1 - 4/2).
  CHECK(bleu({pair("a b", {"a b c d"})}, 1) == doctest::Approx(100.0 * std::exp(-1.0)));
  CHECK_THROWS_AS(bleu({}, 1), std::invalid_argument);
  CHECK_THROWS_AS(bleu({pair("a", {"a"})}, 5), std::invalid_argument);
}

TEST_CASE("ROUGE-L") {
  CHECK(rouge_l({pair("a b c", {"a b c"})}) == doctest::Approx(100.0));
  CHECK(rouge_l({pair("a b c", {"d e"})}) == 0.0);
  CHECK(rouge_l({pair("", {"d e"})}) == 0.0);
  const double f = 2.44 * 0.75 / (1.0 + 1.44 * 0.75);
  CHECK(rouge_l({pair("a b c d", {"a c d"})}) == doctest::Approx(100.0 * f));
  CHECK(lcs_length({"a", "b", "c", "d"}, {"a", "c", "d"}) == 3);
}

TEST_CASE("CIDEr-D matches the loop oracle") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t images = 2 + rng() % 4;
    std::vector<EvalPair> corpus;
    std::vector<oracle::CiderCase> cases;
    for (std::size_t i = 0; i < images; ++i) {
      EvalPair p;
      p.id = std::to_string(i);
      p.candidate = random_sentence(rng, 6);
      const std::size_t refs = 1 + rng() % 3;
      for (std::size_t r = 0; r < refs; ++r) p.references.push_back(random_sentence(rng, 6));
      oracle::CiderCase c{text::tokenize(p.candidate), {}};
      for (const auto& r : p.references) c.references.push_back(text::tokenize(r));
      corpus.push_back(p);
      cases.push_back(c);
    }
    const double want = oracle::cider_d(cases);
    CHECK(std::fabs(cider_raw(corpus) - want) < 1e-10);
  }
}

TEST_CASE("CIDEr properties") {
  const std::vector<EvalPair> same = {pair("a red sign on it", {"a red sign on it"}),
                                      pair("two dogs run far away", {"two dogs run far away"}),
                                      pair("the pepsi can is cold", {"the pepsi can is cold"})};
  // Exact match: similarity 1 for each order, so 10 per pair.
  CHECK(cider_raw(same) == doctest::Approx(10.0));
  // Orders 3 and 4 are empty for two words: 10 * 2/4 for the match, 0 for the miss.
  CHECK(cider({pair("x y z", {"d e f"}), pair("a b", {"a b"})}) == doctest::Approx(250.0));

  // IDF ordering: "a" occurs in all three documents, "sign" in one.
  const CiderIdf idf({{{"a", "sign"}}, {{"a", "dog"}}, {{"a", "cup"}}});
  CHECK(idf.idf({"a"}) == doctest::Approx(0.0));
  CHECK(idf.idf({"sign"}) == doctest::Approx(std::log(3.0)));
  CHECK(idf.idf({"a"}) < idf.idf({"sign"}));

  std::vector<EvalPair> shuffled = {pair("a red cup", {"a red sign", "the sign"}), pair("two dogs", {"two dogs run"}),
                                    pair("pepsi can", {"the pepsi can"})};
  const double before = cider_raw(shuffled);
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(cider_raw(shuffled) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("AnsRecall") {
  CHECK(*ans_recall({pair("the beacon store", {"r"}, {"Beacon Lighting"})}) == doctest::Approx(50.0));
  CHECK(*ans_recall({pair("beacon lighting", {"r"}, {"Beacon Lighting"})}) == doctest::Approx(100.0));
  // Set semantics: {beacon, lighting} from both answers, one found.
  CHECK(*ans_recall({pair("beacon", {"r"}, {"beacon beacon", "Lighting beacon"})}) == doctest::Approx(50.0));
  // Pairs without answers are excluded.
  CHECK(*ans_recall({pair("beacon", {"r"}, {"beacon"}), pair("x", {"r"})}) == doctest::Approx(100.0));
  CHECK_FALSE(ans_recall({pair("x", {"r"})}).has_value());
}

TEST_CASE("Div-n") {
  CHECK(*div_n({{"a b", "a c"}}, 1) == doctest::Approx(75.0));
  CHECK(*div_n({{"a", "a"}}, 1) == doctest::Approx(50.0));
  CHECK(*div_n({{"a b", "c d"}}, 1) == doctest::Approx(100.0));
  // Bigrams {a b, a c} over 4 words.
  CHECK(*div_n({{"a b", "a c"}}, 2) == doctest::Approx(50.0));
  CHECK_FALSE(div_n({{"only one"}}, 1).has_value());
}

TEST_CASE("SelfCIDEr kernel spread") {
  CHECK(kernel_diversity({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(kernel_diversity({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}) == doctest::Approx(100.0));

  const std::vector<std::vector<double>> k = {{1, .5, 0}, {.5, 1, 0}, {0, 0, 1}};
  const auto eig = oracle::symmetric_eigenvalues(k);
  double sum = 0.0, top = 0.0;
  for (double e : eig) {
    sum += std::fabs(e);
    top = std::max(top, std::fabs(e));
  }
  CHECK(top == doctest::Approx(1.5));
  CHECK(std::fabs(kernel_diversity(k) - 100.0 * -std::log(top / sum) / std::log(3.0)) < 1e-10);
}

TEST_CASE("SelfCIDEr on caption sets") {
  const auto s_identical = self_cider({{"a red sign", "a red sign", "a red sign"}, {"a dog", "a dog"}});
  REQUIRE(s_identical.has_value());
  CHECK(std::fabs(*s_identical) < 1e-6);
  const auto s_disjoint = self_cider({{"red sign", "two dogs", "pepsi can"}, {"blue door", "old man"}});
  REQUIRE(s_disjoint.has_value());
  CHECK(std::fabs(*s_disjoint - 100.0) < 1e-6);

  // Captions with no weighted n-gram still count as identical.
  CHECK(std::fabs(*self_cider({{"", ""}, {"a b", "a b"}})) < 1e-6);

  std::vector<std::string> set = {"a red sign", "a red door", "two dogs"};
  const auto other = std::vector<std::string>{"x y", "z w"};
  const double before = *self_cider({set, other});
  std::reverse(set.begin(), set.end());
  CHECK(*self_cider({set, other}) == doctest::Approx(before).epsilon(1e-12));
  CHECK(before > 0.0);
  CHECK(before < 100.0);
}

TEST_CASE("full report") {
  std::istringstream in(
      R"({"id":"1","candidate":"the sign says beacon","references":["the sign says beacon"],"answers":["beacon"],"group_id":"img"})"
      "\n"
      R"({"id":"2","candidate":"a red door","references":["a blue door"],"answers":["red"],"group_id":"img"})"
      "\n");
  const auto corpus = read_eval_pairs(in);
  REQUIRE(corpus.size() == 2);
  const auto r = evaluate(corpus);
  CHECK(*r.ans_recall == doctest::Approx(100.0));
  CHECK(r.div1.has_value());
  CHECK(report_json(r).find("\"METEOR\": null") != std::string::npos);
  CHECK(report_table(r).rfind("BLEU1", 0) == 0);

  std::istringstream bad(R"({"candidate":"x","references":[]})");
  CHECK_THROWS_WITH_AS(read_eval_pairs(bad), doctest::Contains("line 1"), std::invalid_argument);
}
