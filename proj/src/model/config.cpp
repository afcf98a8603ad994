#include "qctc/model/config.hpp"

#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qctc {

namespace {

template <typename Visit>
void for_each_field(ModelConfig& c, Visit&& visit) {
  visit("vocab_size", c.vocab_size);
  visit("feature_dim", c.feature_dim);
  visit("d_model", c.d_model);
  visit("heads", c.heads);
  visit("ffn_dim", c.ffn_dim);
  visit("geometry_layers", c.geometry_layers);
  visit("text_layers", c.text_layers);
  visit("fusion_layers", c.fusion_layers);
  visit("max_query_len", c.max_query_len);
  visit("max_caption_len", c.max_caption_len);
  visit("max_objects", c.max_objects);
  visit("max_ocr", c.max_ocr);
  visit("scale_question_attention", c.scale_question_attention);
  visit("use_geometry", c.use_geometry);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size <= 5) throw std::invalid_argument("vocab_size must exceed the 5 reserved ids");
  if (d_model == 0 || heads == 0 || d_model % heads != 0)
    throw std::invalid_argument("d_model must be a positive multiple of heads");
  if (feature_dim == 0 || ffn_dim == 0) throw std::invalid_argument("feature_dim and ffn_dim must be positive");
  if (max_query_len == 0 || max_caption_len == 0) throw std::invalid_argument("length caps must be positive");
}

std::string ModelConfig::to_text() const {
  std::ostringstream out;
  ModelConfig copy = *this;
  for_each_field(copy, [&](const char* key, auto& value) {
    out << key << " = " << value << '\n';
  });
  return out.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("config line without '=': " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  ModelConfig c;
  for_each_field(c, [&](const char* key, auto& value) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    std::istringstream parse(it->second);
    parse >> value;
    if (!parse) throw std::invalid_argument(std::string("bad value for ") + key + ": " + it->second);
    kv.erase(it);
  });
  if (!kv.empty()) throw std::invalid_argument("unknown model config key: " + kv.begin()->first);
  return c;
}

}  // namespace qctc
