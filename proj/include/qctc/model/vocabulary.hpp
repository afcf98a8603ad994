#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace qctc {

// Fixed word vocabulary. Ids are line numbers of the vocabulary file; the
// first five lines are reserved.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kBos = 2;
  static constexpr std::size_t kEos = 3;
  static constexpr std::size_t kSep = 4;
  static constexpr std::size_t kReserved = 5;

  Vocabulary();  // reserved tokens only
  explicit Vocabulary(std::vector<std::string> tokens);

  static Vocabulary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  // Reserved tokens followed by every normalized token of the texts seen at
  // least min_count times, in first-seen order.
  static Vocabulary build(const std::vector<std::string>& texts, std::size_t min_count = 1);

  std::size_t size() const { return tokens_.size(); }
  bool contains(const std::string& token) const { return index_.count(token) != 0; }
  // Unknown tokens map to kUnk.
  std::size_t id(const std::string& token) const;
  const std::string& token(std::size_t id) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Normalizes and maps a sentence; OOV tokens become kUnk.
  std::vector<std::size_t> encode(const std::string& sentence) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace qctc
