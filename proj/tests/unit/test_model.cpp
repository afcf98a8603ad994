#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "qctc/model/gqam.hpp"
#include "qctc/numeric/grad_check.hpp"
#include "qctc/numeric/matrix_io.hpp"
#include "qctc/text/normalize.hpp"

using namespace qctc;

namespace {

std::vector<BoundingBox> random_boxes(std::size_t n, Rng& rng) {
  std::vector<BoundingBox> boxes;
  for (std::size_t i = 0; i < n; ++i)
    boxes.push_back({0.1 + 0.8 * rng.uniform(), 0.1 + 0.8 * rng.uniform(),
                     0.05 + 0.5 * rng.uniform(), 0.05 + 0.5 * rng.uniform()});
  return boxes;
}

void check_close(const Tensor& a, const Tensor& b, double tol) {
  REQUIRE(a.same_shape(b));
  CHECK(max_abs_difference(a, b) <= tol);
}

Tensor repeat_row(const Tensor& row, std::size_t n) {
  Tensor out(n, row.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < row.cols(); ++c) out(i, c) = row[c];
  return out;
}

Tensor row_of(const Tensor& t, std::size_t r) {
  return Tensor::row_vector(t.row(r));
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.vocab_size = 12;
  c.feature_dim = 6;
  c.d_model = 16;
  c.heads = 2;
  c.ffn_dim = 24;
  c.fusion_layers = 1;
  c.max_caption_len = 8;
  return c;
}

ModelInput tiny_input(Rng& rng, std::size_t n_obj = 2, std::size_t n_ocr = 2) {
  ModelInput in;
  in.regions.object_features = uniform_tensor(n_obj, 6, -1.0, 1.0, rng);
  in.regions.ocr_features = uniform_tensor(n_ocr, 6, -1.0, 1.0, rng);
  in.regions.object_boxes = random_boxes(n_obj, rng);
  in.regions.ocr_boxes = random_boxes(n_ocr, rng);
  for (std::size_t k = 0; k < n_ocr; ++k) in.regions.ocr_tokens.push_back("Word" + std::to_string(k));
  in.question_ids = {5, 6, 4, 7};
  in.initial_ids = {8, 9};
  return in;
}

}  // namespace

TEST_CASE("relative geometry examples") {
  const auto same = relative_geometry({0.5, 0.5, 0.2, 0.2}, {0.5, 0.5, 0.2, 0.2});
  CHECK(same[0] == doctest::Approx(-6.907755278982137).epsilon(1e-12));
  CHECK(same[1] == doctest::Approx(-6.907755278982137).epsilon(1e-12));
  CHECK(same[2] == 0.0);
  CHECK(same[3] == 0.0);

  const auto g = relative_geometry({0.5, 0.5, 0.2, 0.2}, {0.7, 0.5, 0.4, 0.2});
  CHECK(g[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(std::log(1e-3)));
  CHECK(g[2] == doctest::Approx(std::log(2.0)));
  CHECK(g[3] == 0.0);

  Rng rng(3);
  const auto boxes = random_boxes(3, rng);
  const Tensor m = relative_geometry_matrix(boxes);
  REQUIRE(m.rows() == 9);
  const auto g12 = relative_geometry(boxes[1], boxes[2]);
  for (std::size_t k = 0; k < 4; ++k) CHECK(m(1 * 3 + 2, k) == g12[k]);
}

TEST_CASE("geometry attention matches the loop oracle") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + seed % 4;
    ParameterSet ps;
    GeometryAttentionLayer layer(ps, "g", 8, 2, rng);
    const Tensor v = uniform_tensor(n, 8, -1.0, 1.0, rng);
    const auto boxes = random_boxes(n, rng);
    Tape t(false);
    auto out = layer.forward(t, t.constant(v), relative_geometry_matrix(boxes));
    const auto ref = oracle::geometry_layer(ps, "g", 2, v, boxes);
    check_close(out.states.value(), ref.states, 1e-10);
    for (std::size_t h = 0; h < 2; ++h) {
      check_close(out.weights[h].value(), ref.weights[h], 1e-10);
      check_close(out.geometry_scores[h].value(), ref.geometry_scores[h], 1e-10);
    }
  }
}

TEST_CASE("geometry attention degenerate cases") {
  Rng rng(11);
  ParameterSet ps;
  GeometryAttentionLayer layer(ps, "g", 8, 2, rng);
  Tape t(false);

  SUBCASE("single region") {
    auto out = layer.forward(t, t.constant(uniform_tensor(1, 8, -1, 1, rng)),
                             relative_geometry_matrix({{0.3, 0.4, 0.2, 0.1}}));
    for (const auto& w : out.weights) CHECK(w.value()(0, 0) == 1.0);
  }

  SUBCASE("identical regions split attention evenly") {
    const Tensor v = repeat_row(uniform_tensor(1, 8, -1, 1, rng), 2);
    const BoundingBox b{0.4, 0.6, 0.2, 0.3};
    auto out = layer.forward(t, t.constant(v), relative_geometry_matrix({b, b}));
    for (const auto& w : out.weights)
      for (double a : w.value().data()) CHECK(a == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("constant geometry scores reduce to softmax of visual scores") {
    for (std::size_t h = 0; h < 2; ++h)
      layer.geometry_projection(h).value = Tensor::from_rows({{-1.0}, {0.0}, {0.0}, {0.0}});
    const BoundingBox b{0.4, 0.6, 0.2, 0.3};
    auto out = layer.forward(t, t.constant(uniform_tensor(3, 8, -1, 1, rng)),
                             relative_geometry_matrix({b, b, b}));
    for (std::size_t h = 0; h < 2; ++h) {
      const Tensor& sv = out.visual_scores[h].value();
      for (std::size_t i = 0; i < 3; ++i) {
        double total = 0.0;
        for (std::size_t j = 0; j < 3; ++j) total += std::exp(sv(i, j));
        for (std::size_t j = 0; j < 3; ++j)
          CHECK(out.weights[h].value()(i, j) ==
                doctest::Approx(std::exp(sv(i, j)) / total).epsilon(1e-12));
      }
    }
  }

  SUBCASE("all-zero geometry scores fall back to uniform weights") {
    for (std::size_t h = 0; h < 2; ++h) layer.geometry_projection(h).value = Tensor(4, 1);
    auto out = layer.forward(t, t.constant(uniform_tensor(4, 8, -1, 1, rng)),
                             relative_geometry_matrix(random_boxes(4, rng)));
    for (const auto& w : out.weights)
      for (double a : w.value().data()) CHECK(a == 0.25);
  }
}

TEST_CASE("geometry attention is invariant to translating every box") {
  Rng rng(5);
  ParameterSet ps;
  GeometryEncoder enc(ps, "geo", 8, 2, 1, rng);
  const Tensor v = uniform_tensor(4, 8, -1, 1, rng);
  auto boxes = random_boxes(4, rng);
  Tape t(false);
  const Tensor before = enc.forward(t, t.constant(v), boxes).states.value();
  for (auto& b : boxes) {
    b.cx += 0.0625;
    b.cy -= 0.03125;
  }
  const Tensor after = enc.forward(t, t.constant(v), boxes).states.value();
  check_close(before, after, 1e-12);
}

TEST_CASE("geometry encoder rejects bad region sets") {
  Rng rng(1);
  ParameterSet ps;
  GeometryEncoder enc(ps, "geo", 8, 2, 1, rng);
  Tape t(false);
  CHECK_THROWS_AS(enc.forward(t, t.constant(Tensor(0, 8)), {}), std::invalid_argument);
  CHECK_THROWS_AS(enc.forward(t, t.constant(Tensor(2, 8)), random_boxes(3, rng)),
                  std::invalid_argument);
}

TEST_CASE("question-guided attention matches the loop oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    ParameterSet ps;
    const bool scaled = seed % 2 == 1;
    QuestionGuidedAttention qga(ps, "qga", 8, scaled, rng);
    const Tensor q = uniform_tensor(4, 8, -1, 1, rng);
    const Tensor v = uniform_tensor(3, 8, -1, 1, rng);
    Tape t(false);
    auto out = qga.forward(t, t.constant(q), t.constant(v));
    const auto ref = oracle::question_attention(qga.query().value, qga.key().value,
                                                qga.visual_out().value, qga.text_out().value, q,
                                                v, scaled);
    check_close(out.beta.value(), ref.beta, 1e-10);
    check_close(out.tokens.value(), ref.tokens, 1e-10);
  }
}

TEST_CASE("question-guided attention degenerate cases") {
  Rng rng(7);
  ParameterSet ps;
  QuestionGuidedAttention qga(ps, "qga", 8, false, rng);
  const Tensor q = uniform_tensor(3, 8, -1, 1, rng);
  Tape t(false);

  SUBCASE("single region") {
    const Tensor v = uniform_tensor(1, 8, -1, 1, rng);
    auto out = qga.forward(t, t.constant(q), t.constant(v));
    for (double b : out.beta.value().data()) CHECK(b == 1.0);
    Tensor expect = oracle::matmul(q, qga.text_out().value);
    const Tensor visual = oracle::matmul(v, qga.visual_out().value);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t c = 0; c < 8; ++c) expect(i, c) += visual(0, c);
    check_close(out.tokens.value(), expect, 1e-12);
  }

  SUBCASE("identical keys") {
    const Tensor v = repeat_row(uniform_tensor(1, 8, -1, 1, rng), 2);
    auto out = qga.forward(t, t.constant(q), t.constant(v));
    for (double b : out.beta.value().data()) CHECK(b == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("zero visual projection leaves the text path") {
    qga.visual_out().value.fill(0.0);
    auto out = qga.forward(t, t.constant(q), t.constant(uniform_tensor(3, 8, -1, 1, rng)));
    check_close(out.tokens.value(), oracle::matmul(q, qga.text_out().value), 1e-12);
  }

  SUBCASE("zero text projection leaves the attended visual path") {
    qga.text_out().value.fill(0.0);
    const Tensor v = uniform_tensor(3, 8, -1, 1, rng);
    auto out = qga.forward(t, t.constant(q), t.constant(v));
    const Tensor expect =
        oracle::matmul(oracle::matmul(out.beta.value(), v), qga.visual_out().value);
    check_close(out.tokens.value(), expect, 1e-12);
  }

  SUBCASE("rejected input") {
    CHECK_THROWS_AS(qga.forward(t, t.constant(Tensor(0, 8)), t.constant(Tensor(2, 8))),
                    std::invalid_argument);
    CHECK_THROWS_AS(qga.forward(t, t.constant(q), t.constant(Tensor(0, 8))),
                    std::invalid_argument);
    CHECK_THROWS_AS(qga.forward(t, t.constant(q), t.constant(Tensor(2, 5))),
                    std::invalid_argument);
  }
}

TEST_CASE("geometry and question attention gradients") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(200 + seed);
    ParameterSet ps;
    GeometryEncoder geo(ps, "geo", 8, 2, 1, rng);
    QuestionGuidedAttention qga(ps, "qga", 8, false, rng);
    const Tensor v = uniform_tensor(3, 8, -1, 1, rng);
    const Tensor q = uniform_tensor(2, 8, -1, 1, rng);
    const Tensor w = uniform_tensor(2, 8, -1, 1, rng);
    const auto boxes = random_boxes(3, rng);
    auto loss = [&](Tape& t) {
      Var vis = geo.forward(t, t.constant(v), boxes).states;
      Var out = qga.forward(t, t.constant(q), vis).tokens;
      return ad::sum(ad::mul(out, t.constant(w)));
    };
    const auto params = ps.all();
    const auto res = grad_check(loss, params);
    CAPTURE(res.worst_parameter);
    CHECK(res.max_relative_error < 1e-4);
  }
}

TEST_CASE("text encoder") {
  Rng rng(9);
  ParameterSet ps;
  TextEncoder enc(ps, 10, 8, 2, 16, 0, 5, rng);
  Tape t(false);
  const std::size_t id = 3;
  const Tensor row = enc.embed(t, std::span(&id, 1), SequenceKind::kQuestion).value();
  for (std::size_t c = 0; c < 8; ++c)
    CHECK(row(0, c) == doctest::Approx(enc.token_table().value(3, c) +
                                       enc.position_table().value(0, c) +
                                       enc.segment_table().value(0, c))
                           .epsilon(1e-15));

  const std::vector<std::size_t> ids{1, 2, 3};
  CHECK(enc.embed(t, ids, SequenceKind::kQuestion).value() !=
        enc.embed(t, ids, SequenceKind::kInitialCaption).value());
  CHECK_THROWS_AS(enc.embed(t, {}, SequenceKind::kQuestion), std::invalid_argument);
  const std::vector<std::size_t> oov{2, 10};
  CHECK_THROWS_AS(enc.embed(t, oov, SequenceKind::kQuestion), std::invalid_argument);
  const std::vector<std::size_t> long_seq(6, 2);
  CHECK_THROWS_AS(enc.embed(t, long_seq, SequenceKind::kQuestion), std::invalid_argument);

  ParameterSet ps2;
  Rng rng2(9);
  TextEncoder again(ps2, 10, 8, 2, 16, 1, 5, rng2);
  Tape t2(false);
  CHECK(again.embed(t2, ids, SequenceKind::kQuestion).value() ==
        again.embed(t2, ids, SequenceKind::kQuestion).value());
}

TEST_CASE("fusion mask structure") {
  const StreamLayout layout{2, 1, 1, 1, 3};
  const ad::Mask m = fusion_mask(layout);
  for (std::size_t i = 0; i < layout.total(); ++i)
    for (std::size_t j = 0; j < layout.total(); ++j) {
      const bool dec_i = i >= 5, dec_j = j >= 5;
      const bool expect = !dec_j || (dec_i && j <= i);
      CHECK(m(i, j) == expect);
    }
}

TEST_CASE("fusion transformer matches the loop oracle and masks exactly") {
  Rng rng(21);
  ParameterSet ps;
  MultimodalDecoder dec(ps, 7, 8, 2, 12, 1, 4, 64, rng);
  Tape t(false);
  MultimodalDecoder::Streams s{t.constant(uniform_tensor(2, 8, -1, 1, rng)),
                               t.constant(uniform_tensor(2, 8, -1, 1, rng)),
                               t.constant(uniform_tensor(1, 8, -1, 1, rng)),
                               t.constant(uniform_tensor(1, 8, -1, 1, rng)),
                               t.constant(uniform_tensor(3, 8, -1, 1, rng))};
  const Tensor z = dec.fuse(t, s).value();
  const Var parts[] = {s.objects, s.ocr, s.question, s.initial, s.decoded};
  const Tensor x = ad::concat_rows(parts).value();
  const ad::Mask mask = fusion_mask({2, 2, 1, 1, 3});
  check_close(z, oracle::transformer_layer(ps, "dec.l0", 2, x, &mask), 1e-10);

  TransformerLayer layer(ps, "probe", 8, 2, 12, rng);
  auto out = layer.forward(t, t.constant(x), &mask);
  for (const auto& w : out.attention)
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = 0; j < 9; ++j)
        if (!mask(i, j)) CHECK(w.value()(i, j) == 0.0);
}

TEST_CASE("fusion input contracts") {
  Rng rng(22);
  ParameterSet ps;
  MultimodalDecoder dec(ps, 7, 8, 2, 12, 1, 4, 6, rng);
  Tape t(false);
  const Var empty = t.constant(Tensor(0, 8));
  MultimodalDecoder::Streams only_dec{empty, empty, empty, empty,
                                      t.constant(uniform_tensor(2, 8, -1, 1, rng))};
  CHECK(dec.fuse(t, only_dec).rows() == 2);
  MultimodalDecoder::Streams too_long{t.constant(uniform_tensor(5, 8, -1, 1, rng)), empty, empty,
                                      empty, t.constant(uniform_tensor(2, 8, -1, 1, rng))};
  CHECK_THROWS_AS(dec.fuse(t, too_long), std::invalid_argument);
}

TEST_CASE("pointer scores") {
  Rng rng(31);
  ParameterSet ps;
  MultimodalDecoder dec(ps, 6, 8, 2, 12, 1, 4, 64, rng);
  for (const char* name : {"dec.fc.b", "ptr.dec.b", "ptr.ocr.b"})
    ps.at(name).value = uniform_tensor(1, ps.at(name).value.cols(), -1, 1, rng);
  Tape t(false);

  SUBCASE("loop oracle") {
    const Tensor zd = uniform_tensor(3, 8, -1, 1, rng);
    const Tensor zo = uniform_tensor(4, 8, -1, 1, rng);
    const Tensor got = dec.pointer_scores(t, t.constant(zd), t.constant(zo)).value();
    const Tensor ref = oracle::pointer_scores(
        ps.at("dec.fc.w").value, ps.at("dec.fc.b").value, ps.at("ptr.dec.w").value,
        ps.at("ptr.dec.b").value, ps.at("ptr.ocr.w").value, ps.at("ptr.ocr.b").value, zd, zo);
    check_close(got, ref, 1e-12);
  }

  SUBCASE("zero decoder state and bias") {
    ps.at("ptr.dec.b").value.fill(0.0);
    const Tensor got = dec.pointer_scores(t, t.constant(Tensor(1, 8)),
                                          t.constant(uniform_tensor(3, 8, -1, 1, rng)))
                           .value();
    const JointDistribution d = make_joint_distribution(got, 6);
    for (double s : d.ocr_scores.data()) CHECK(s == 0.0);
    for (std::size_t k = 6; k < 9; ++k) CHECK(d.combined[k] == 0.5);
  }

  SUBCASE("no OCR regions") {
    const Tensor got =
        dec.pointer_scores(t, t.constant(uniform_tensor(1, 8, -1, 1, rng)), t.constant(Tensor(0, 8)))
            .value();
    CHECK(make_joint_distribution(got, 6).size() == 6);
  }
}

TEST_CASE("joint distribution argmax") {
  auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  Tensor row(1, 12, logit(0.1));
  row(0, 7) = logit(0.9);
  row(0, 10) = logit(0.8);
  JointDistribution d = make_joint_distribution(row, 9);
  CHECK(d.argmax() == 7);
  CHECK(d.size() == 12);

  Tensor tie(1, 4, 0.0);
  CHECK(make_joint_distribution(tie, 2).argmax() == 0);

  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor r = uniform_tensor(1, 9, -30, 30, rng);
    const JointDistribution j = make_joint_distribution(r, 5);
    std::size_t best = 0;
    for (std::size_t k = 1; k < 9; ++k)
      if (r[k] > r[best]) best = k;
    CHECK(j.argmax() == best);
    for (double p : j.combined.data()) {
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
  }
}

TEST_CASE("decoder causality under teacher forcing") {
  Rng rng(41);
  GqamModel model(tiny_config(), 5);
  const ModelInput in = tiny_input(rng);
  Tape t(false);
  const Encoded enc = model.encode(t, in);
  const std::vector<std::size_t> a{Vocabulary::kBos, 7, 8, 13, 9};
  for (std::size_t pos = 1; pos < a.size(); ++pos) {
    std::vector<std::size_t> b = a;
    b[pos] = 10;
    const Tensor la = model.logits(t, enc, a).value();
    const Tensor lb = model.logits(t, enc, b).value();
    for (std::size_t r = 0; r < a.size(); ++r) {
      CAPTURE(pos);
      CAPTURE(r);
      if (r < pos)
        CHECK(row_of(la, r) == row_of(lb, r));
      else
        CHECK(row_of(la, r) != row_of(lb, r));
    }
  }
  CHECK(model.logits(t, enc, a).cols() == 14);
  const std::vector<std::size_t> bad{Vocabulary::kBos, 14};
  CHECK_THROWS_AS(model.logits(t, enc, bad), std::invalid_argument);
}

TEST_CASE("greedy decoding") {
  Rng rng(51);
  GqamModel model(tiny_config(), 6);
  std::vector<std::string> words = Vocabulary().tokens();
  for (int i = 0; i < 7; ++i) words.push_back("w" + std::to_string(i));
  Vocabulary vocab(words);
  REQUIRE(vocab.size() == 12);
  const ModelInput in = tiny_input(rng);

  SUBCASE("deterministic and bounded") {
    const DecodedCaption a = model.greedy_decode(in, vocab);
    const DecodedCaption b = model.greedy_decode(in, vocab);
    CHECK(a.text == b.text);
    CHECK(a.tokens.size() <= 8);
    CHECK(model.greedy_decode(in, vocab, 3).tokens.size() <= 3);
  }

  SUBCASE("EOS first gives an empty caption") {
    auto& ps = model.parameters();
    ps.at("dec.fc.w").value.fill(0.0);
    ps.at("dec.fc.b").value.fill(-10.0);
    ps.at("dec.fc.b").value[Vocabulary::kEos] = 10.0;
    ps.at("ptr.dec.w").value.fill(0.0);
    ps.at("ptr.dec.b").value.fill(0.0);
    const DecodedCaption c = model.greedy_decode(in, vocab);
    CHECK(c.tokens.empty());
    CHECK(c.text.empty());
  }

  SUBCASE("OCR copies render the OCR word") {
    auto& ps = model.parameters();
    ps.at("dec.fc.w").value.fill(0.0);
    ps.at("dec.fc.b").value.fill(-10.0);
    ps.at("ptr.dec.w").value.fill(0.0);
    ps.at("ptr.dec.b").value.fill(1.0);
    ps.at("ptr.ocr.w").value.fill(0.0);
    ps.at("ptr.ocr.b").value.fill(0.0);
    ps.at("ptr.ocr.b").value[0] = 5.0;  // ocr_k score = 5 for every k, ties -> slot 0
    const DecodedCaption c = model.greedy_decode(in, vocab, 2);
    REQUIRE(c.tokens.size() == 2);
    CHECK(c.tokens[0].from_ocr);
    CHECK(c.tokens[0].index == 0);
    CHECK(c.text == "word0 word0");
  }

  SUBCASE("vocabulary size mismatch is rejected") {
    CHECK_THROWS_AS(model.greedy_decode(in, Vocabulary()), std::invalid_argument);
  }
}

TEST_CASE("model accepts empty question and caption streams") {
  Rng rng(61);
  GqamModel model(tiny_config(), 7);
  ModelInput in = tiny_input(rng, 3, 0);
  in.question_ids.clear();
  in.initial_ids.clear();
  Tape t(false);
  const Encoded enc = model.encode(t, in);
  const std::vector<std::size_t> bos{Vocabulary::kBos};
  CHECK(model.logits(t, enc, bos).cols() == 12);

  ModelInput none = tiny_input(rng, 0, 0);
  CHECK_THROWS_AS(model.encode(t, none), std::invalid_argument);
}

TEST_CASE("model without geometry encoder") {
  ModelConfig c = tiny_config();
  c.use_geometry = false;
  GqamModel model(c, 8);
  CHECK_FALSE(model.parameters().contains("geo.l0.h0.wg"));
  Rng rng(62);
  Tape t(false);
  CHECK(model.encode(t, tiny_input(rng)).traces.empty());
}

TEST_CASE("model config text round trip") {
  ModelConfig c = tiny_config();
  c.scale_question_attention = true;
  CHECK(ModelConfig::from_text(c.to_text()) == c);
  CHECK_THROWS_AS(ModelConfig::from_text("bogus = 1\n"), std::invalid_argument);
  ModelConfig bad = c;
  bad.heads = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("vocabulary") {
  const Vocabulary v = Vocabulary::build({"A sign, says OPEN.", "a door"});
  CHECK(v.size() == Vocabulary::kReserved + 5);
  CHECK(v.token(Vocabulary::kSep) == "<sep>");
  CHECK(v.id("a") == 5);
  CHECK(v.id("missing") == Vocabulary::kUnk);
  CHECK(v.encode("Open door!") == std::vector<std::size_t>{8, 9});

  const auto path = std::filesystem::temp_directory_path() / "qctc_vocab_test.txt";
  v.save(path);
  CHECK(Vocabulary::load(path).tokens() == v.tokens());
  std::filesystem::remove(path);
}

TEST_CASE("tokenizer") {
  CHECK(text::tokenize("  The SIGN, says \"Open\"!  ") ==
        std::vector<std::string>{"the", "sign", "says", "open"});
  CHECK(text::normalize_token("...") == "");
  CHECK(text::normalize_token("U.S.A.") == "u.s.a");
  CHECK(text::join({"a", "b"}) == "a b");
}

TEST_CASE("region file loading") {
  const auto dir = std::filesystem::temp_directory_path() / "qctc_region_test";
  std::filesystem::create_directories(dir);
  matrix_io::save(dir / "obj.bin", Tensor::from_rows({{1, 2}, {3, 4}}));
  matrix_io::save(dir / "ocr.bin", Tensor::from_rows({{5, 6}}));
  {
    std::ofstream f(dir / "regions.jsonl");
    f << R"({"image_id": "img1", "object_boxes": [[0.5,0.5,0.2,0.2],[0.3,0.3,0.1,0.1]],)"
      << R"( "ocr_boxes": [[0.7,0.5,0.4,0.2]], "ocr_tokens": ["Beacon"],)"
      << R"( "object_features": "obj.bin", "ocr_features": "ocr.bin"})" << "\n";
  }
  const auto regions = load_region_file(dir / "regions.jsonl");
  REQUIRE(regions.count("img1") == 1);
  const RegionSet& r = regions.at("img1");
  CHECK(r.size() == 3);
  CHECK(r.ocr_tokens == std::vector<std::string>{"Beacon"});
  CHECK(r.object_features == Tensor::from_rows({{1, 2}, {3, 4}}));
  CHECK(r.truncated(1, 0).size() == 1);
  std::filesystem::remove_all(dir);
}
