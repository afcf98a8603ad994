#include "qctc/model/regions.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "qctc/numeric/matrix_io.hpp"
#include "qctc/numeric/ops.hpp"

namespace qctc {

bool BoundingBox::valid() const {
  return cx >= 0.0 && cx <= 1.0 && cy >= 0.0 && cy <= 1.0 && w > 0.0 && w <= 1.0 && h > 0.0 &&
         h <= 1.0;
}

std::vector<BoundingBox> RegionSet::joint_boxes() const {
  std::vector<BoundingBox> boxes = object_boxes;
  boxes.insert(boxes.end(), ocr_boxes.begin(), ocr_boxes.end());
  return boxes;
}

void RegionSet::validate() const {
  if (object_features.rows() != object_boxes.size())
    throw std::invalid_argument("object feature rows do not match object boxes");
  if (ocr_features.rows() != ocr_boxes.size())
    throw std::invalid_argument("ocr feature rows do not match ocr boxes");
  if (ocr_tokens.size() != ocr_boxes.size())
    throw std::invalid_argument("ocr tokens do not match ocr boxes");
  if (!object_boxes.empty() && !ocr_boxes.empty() && object_features.cols() != ocr_features.cols())
    throw std::invalid_argument("object and ocr feature widths differ");
  for (const auto& b : object_boxes)
    if (!b.valid()) throw std::invalid_argument("invalid object bounding box");
  for (const auto& b : ocr_boxes)
    if (!b.valid()) throw std::invalid_argument("invalid ocr bounding box");
}

namespace {

Tensor first_rows(const Tensor& t, std::size_t n) {
  n = std::min(n, t.rows());
  auto data = t.data();
  return Tensor(n, t.cols(), std::vector<double>(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n * t.cols())));
}

}  // namespace

RegionSet RegionSet::truncated(std::size_t max_objects, std::size_t max_ocr) const {
  RegionSet r;
  const std::size_t no = std::min(max_objects, object_count());
  const std::size_t nt = std::min(max_ocr, ocr_count());
  r.object_features = first_rows(object_features, no);
  r.ocr_features = first_rows(ocr_features, nt);
  r.object_boxes.assign(object_boxes.begin(), object_boxes.begin() + static_cast<std::ptrdiff_t>(no));
  r.ocr_boxes.assign(ocr_boxes.begin(), ocr_boxes.begin() + static_cast<std::ptrdiff_t>(nt));
  r.ocr_tokens.assign(ocr_tokens.begin(), ocr_tokens.begin() + static_cast<std::ptrdiff_t>(nt));
  return r;
}

std::array<double, 4> relative_geometry(const BoundingBox& bi, const BoundingBox& bj) {
  const double eps = ad::kLogClampEpsilon;
  return {std::log(std::max(std::abs(bi.cx - bj.cx) / bi.w, eps)),
          std::log(std::max(std::abs(bi.cy - bj.cy) / bi.h, eps)), std::log(bj.w / bi.w),
          std::log(bj.h / bi.h)};
}

Tensor relative_geometry_matrix(const std::vector<BoundingBox>& boxes) {
  const std::size_t n = boxes.size();
  Tensor g(n * n, 4);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto r = relative_geometry(boxes[i], boxes[j]);
      for (std::size_t c = 0; c < 4; ++c) g(i * n + j, c) = r[c];
    }
  return g;
}

namespace {

std::vector<BoundingBox> parse_boxes(const nlohmann::json& arr) {
  std::vector<BoundingBox> boxes;
  for (const auto& b : arr) {
    if (!b.is_array() || b.size() != 4) throw std::invalid_argument("box must be [cx, cy, w, h]");
    boxes.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()});
  }
  return boxes;
}

Tensor load_features(const nlohmann::json& rec, const char* key, const std::filesystem::path& base,
                     std::size_t expected_rows) {
  if (!rec.contains(key) || rec[key].is_null()) {
    if (expected_rows != 0) throw std::invalid_argument(std::string("missing ") + key);
    return Tensor();
  }
  return matrix_io::load(base / rec[key].get<std::string>());
}

}  // namespace

std::map<std::string, RegionSet> load_region_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open region file " + path.string());
  const auto base = path.parent_path();
  std::map<std::string, RegionSet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      RegionSet r;
      r.object_boxes = parse_boxes(rec.value("object_boxes", nlohmann::json::array()));
      r.ocr_boxes = parse_boxes(rec.value("ocr_boxes", nlohmann::json::array()));
      r.ocr_tokens = rec.value("ocr_tokens", std::vector<std::string>{});
      r.object_features = load_features(rec, "object_features", base, r.object_boxes.size());
      r.ocr_features = load_features(rec, "ocr_features", base, r.ocr_boxes.size());
      if (r.object_features.empty()) r.object_features = Tensor(0, r.ocr_features.cols());
      if (r.ocr_features.empty()) r.ocr_features = Tensor(0, r.object_features.cols());
      r.validate();
      const std::string id = rec.at("image_id").get<std::string>();
      if (!out.emplace(id, std::move(r)).second)
        throw std::invalid_argument("duplicate image_id " + id);
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace qctc
