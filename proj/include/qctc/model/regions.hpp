#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qctc/numeric/tensor.hpp"

namespace qctc {

// Normalized box: center in [0,1], width/height in (0,1].
struct BoundingBox {
  double cx = 0.5;
  double cy = 0.5;
  double w = 1.0;
  double h = 1.0;

  bool valid() const;
};

// Detected object regions and OCR regions of one image. The joint sequence
// is objects first, then OCR regions.
struct RegionSet {
  Tensor object_features;  // N_obj x feature_dim
  Tensor ocr_features;     // N_ocr x feature_dim
  std::vector<BoundingBox> object_boxes;
  std::vector<BoundingBox> ocr_boxes;
  std::vector<std::string> ocr_tokens;  // aligned with ocr rows

  std::size_t object_count() const { return object_boxes.size(); }
  std::size_t ocr_count() const { return ocr_boxes.size(); }
  std::size_t size() const { return object_count() + ocr_count(); }
  std::vector<BoundingBox> joint_boxes() const;

  // Throws std::invalid_argument when rows, boxes and tokens disagree.
  void validate() const;
  // Keeps the first max_objects / max_ocr regions.
  RegionSet truncated(std::size_t max_objects, std::size_t max_ocr) const;
};

// (log_clamp(|dcx|/w_i), log_clamp(|dcy|/h_i), log(w_j/w_i), log(h_j/h_i)),
// log_clamp(x) = log(max(x, 1e-3)).
std::array<double, 4> relative_geometry(const BoundingBox& bi, const BoundingBox& bj);

// (N*N) x 4 matrix; row i*N + j holds relative_geometry(b_i, b_j).
Tensor relative_geometry_matrix(const std::vector<BoundingBox>& boxes);

// Region input file: JSON lines, one image per line:
//   {"image_id": ..., "object_boxes": [[cx,cy,w,h],...], "ocr_boxes": [...],
//    "ocr_tokens": [...], "object_features": "obj.bin", "ocr_features": "ocr.bin"}
// Feature paths are resolved against the file's directory.
std::map<std::string, RegionSet> load_region_file(const std::filesystem::path& path);

}  // namespace qctc
