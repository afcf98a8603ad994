#pragma once

#include <cstddef>
#include <string>

namespace qctc {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t feature_dim = 32;  // width of ingested region features
  std::size_t d_model = 64;
  std::size_t heads = 4;
  std::size_t ffn_dim = 128;
  std::size_t geometry_layers = 1;
  std::size_t text_layers = 1;  // shared question / initial-caption encoder depth
  std::size_t fusion_layers = 2;
  std::size_t max_query_len = 20;  // joined questions, and initial captions
  std::size_t max_caption_len = 30;
  std::size_t max_objects = 100;
  std::size_t max_ocr = 50;
  bool scale_question_attention = false;
  bool use_geometry = true;  // false drops the geometry encoder ("w/o GE")

  std::size_t head_dim() const { return d_model / heads; }
  // Decoded list has one slot per emitted token plus the BOS slot.
  std::size_t decoder_slots() const { return max_caption_len + 1; }
  std::size_t max_fusion_len() const {
    return max_objects + max_ocr + 2 * max_query_len + decoder_slots();
  }

  void validate() const;
  // Flat "key = value" lines; round-trips through from_text.
  std::string to_text() const;
  static ModelConfig from_text(const std::string& text);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace qctc
