#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mvp/corpus.hpp"
#include "mvp/error.hpp"
#include "mvp/mbti.hpp"
#include "mvp/rng.hpp"
#include "mvp/vocabulary.hpp"

namespace mvp {

struct TokenizedPost {
  std::vector<TokenId> token_ids;

  std::size_t length() const { return token_ids.size(); }
  bool operator==(const TokenizedPost&) const = default;
};

/// The unit of classification: a user's posts and T binary trait labels.
struct UserSample {
  std::string user_id;
  std::vector<TokenizedPost> posts;
  TraitLabels labels;

  bool operator==(const UserSample&) const = default;
};

/// Checks the sample invariants against the given limits and vocabulary size.
void validate_sample(const UserSample& sample, int max_posts, int max_tokens, std::size_t vocab_size);

/// A user after word splitting, scrubbing and truncation but before the
/// vocabulary lookup.
struct WordUser {
  std::string user_id;
  std::vector<std::vector<std::string>> posts;
  TraitLabels labels;
};

/// Splits, scrubs and truncates one user. Posts left empty by scrubbing are
/// dropped, then the first max_posts posts are kept and each is cut to
/// max_tokens tokens. Returns nullopt when no post survives.
std::optional<WordUser> pretokenize_user(const RawUser& raw, int max_tokens, int max_posts);

/// The same treatment for unlabeled posts (labels left empty).
std::optional<WordUser> pretokenize_posts(std::string user_id, const std::vector<std::string>& posts,
                                          int max_tokens, int max_posts);

UserSample index_user(const WordUser& user, const Vocabulary& vocab);

/// pretokenize_user followed by index_user.
std::optional<UserSample> tokenize_user(const RawUser& raw, const Vocabulary& vocab, int max_tokens, int max_posts);

struct SplitSpec {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// floor(n * ratio) for validation and test; the remainder goes to train.
SplitSizes split_sizes(std::size_t n, const SplitSpec& spec);

/// Seeded permutation of 0..n-1 used by split_dataset.
std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed);

template <typename T>
struct Splits {
  std::vector<T> train;
  std::vector<T> val;
  std::vector<T> test;
};

/// Deterministic shuffle-and-cut. Every input lands in exactly one split.
template <typename T>
Splits<T> split_dataset(const std::vector<T>& items, const SplitSpec& spec) {
  spec.validate();
  if (items.size() < 3) throw DataError("need at least 3 users to split, got " + std::to_string(items.size()));
  const SplitSizes sizes = split_sizes(items.size(), spec);
  const auto order = split_permutation(items.size(), spec.seed);
  Splits<T> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const T& item = items[order[i]];
    if (i < sizes.train) {
      out.train.push_back(item);
    } else if (i < sizes.train + sizes.val) {
      out.val.push_back(item);
    } else {
      out.test.push_back(item);
    }
  }
  return out;
}

using Dataset = std::vector<UserSample>;

struct PrepareOptions {
  int max_posts = 50;
  int max_tokens = 70;
  int min_frequency = 1;
  SplitSpec split;
};

struct PreparedData {
  Vocabulary vocab;
  Dataset train;
  Dataset val;
  Dataset test;
  std::vector<std::string> skipped;  // ids of users with no post left after scrubbing
};

/// The full pipeline: scrub and truncate every user, drop degenerate users,
/// split, build the vocabulary from the training split only, then index.
PreparedData prepare_dataset(const std::vector<RawUser>& users, const PrepareOptions& options);

/// Versioned JSON-lines split cache: one header line, then one user per line.
inline constexpr int kCacheVersion = 1;
void save_split(const std::filesystem::path& path, const std::string& split_name, const Dataset& users);
Dataset load_split(const std::filesystem::path& path);

}  // namespace mvp
