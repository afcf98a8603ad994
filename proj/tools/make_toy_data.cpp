// Writes the synthetic toy corpus as pipeline input: raw records for
// build-dataset plus a region file with float32 feature matrices.
//   make_toy_data <out-dir> [seed] [images]
#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "qctc/numeric/matrix_io.hpp"
#include "qctc/train/toy_corpus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_toy_data <out-dir> [seed] [images]\n";
    return 1;
  }
  const fs::path dir = argv[1];
  const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 7;
  const std::size_t images = argc > 3 ? std::stoul(argv[3]) : 10;
  const auto corpus = qctc::make_toy_corpus(seed, images);
  fs::create_directories(dir / "features");

  auto boxes = [](const std::vector<qctc::BoundingBox>& bs) {
    json out = json::array();
    for (const auto& b : bs) out.push_back({b.cx, b.cy, b.w, b.h});
    return out;
  };

  std::ofstream raw(dir / "raw.jsonl"), regions(dir / "regions.jsonl");
  for (std::size_t i = 0; i < corpus.image_pairs.size(); ++i) {
    const auto& [first, second] = corpus.image_pairs[i];
    const std::string image = "toy" + std::to_string(i);
    const auto& rs = corpus.samples[first].regions;
    qctc::matrix_io::save(dir / "features" / (image + "_obj.bin"), rs.object_features);
    qctc::matrix_io::save(dir / "features" / (image + "_ocr.bin"), rs.ocr_features);
    regions << json{{"image_id", image},
                    {"object_boxes", boxes(rs.object_boxes)},
                    {"ocr_boxes", boxes(rs.ocr_boxes)},
                    {"ocr_tokens", rs.ocr_tokens},
                    {"object_features", "features/" + image + "_obj.bin"},
                    {"ocr_features", "features/" + image + "_ocr.bin"}}
                   .dump()
            << "\n";

    for (std::size_t k : {first, second}) {
      const auto& s = corpus.samples[k];
      json ocr = json::array();
      for (std::size_t j = 0; j < rs.ocr_tokens.size(); ++j) {
        const auto& b = rs.ocr_boxes[j];
        ocr.push_back({{"text", rs.ocr_tokens[j]},
                       {"box", {b.cx - b.w / 2, b.cy - b.h / 2, b.cx + b.w / 2, b.cy + b.h / 2}}});
      }
      json qa = json::array();
      for (std::size_t q = 0; q < s.questions.size(); ++q)
        qa.push_back({{"question", s.questions[q]}, {"answer", s.answers[q]}});
      raw << json{{"id", s.id},         {"image_id", image}, {"caption", s.target},
                  {"auto_initial", s.auto_initial}, {"ocr", ocr}, {"entities", json::array()},
                  {"qa", qa}}
                 .dump()
          << "\n";
    }
  }
  std::cout << "wrote " << corpus.samples.size() << " records for " << corpus.image_pairs.size() << " images to "
            << dir.string() << "\n";
  return 0;
}
