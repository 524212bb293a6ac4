#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvp/corpus.hpp"

namespace mvp {

using TokenId = std::int32_t;

/// Token to index map. Index 0 is padding and index 1 the unknown token;
/// real tokens follow in descending count, ties broken lexicographically.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnknown = 1;
  static constexpr const char* kPadToken = "<pad>";
  static constexpr const char* kUnknownToken = "<unk>";

  Vocabulary();

  /// Builds from token counts; tokens below min_frequency are left out.
  static Vocabulary from_counts(const std::unordered_map<std::string, std::int64_t>& counts, int min_frequency);

  TokenId lookup(const std::string& token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::int64_t count(TokenId id) const { return counts_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  int min_frequency() const { return min_frequency_; }

  /// One line per entry: token, index, count separated by tabs.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_ && counts_ == other.counts_; }

 private:
  void append(std::string token, std::int64_t count);

  std::vector<std::string> tokens_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, TokenId> index_;
  int min_frequency_ = 1;
};

/// Counts scrubbed, lower-cased tokens over every post of the given
/// (training) users. Throws DataError when the corpus yields no tokens.
Vocabulary build_vocabulary(const std::vector<RawUser>& train_users, int min_frequency);

}  // namespace mvp
