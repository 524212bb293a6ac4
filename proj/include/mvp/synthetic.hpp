#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mvp/corpus.hpp"

namespace mvp {

/// A corpus where each trait is decided by one disjoint block of the
/// vocabulary. Block t holds `block_size` tokens for each pole; a user's
/// label for trait t is 1 exactly when pole-1 tokens of block t outnumber
/// pole-0 tokens of block t in everything the user wrote. Each post leans
/// on one block (its "view"), and the rest of the vocabulary is filler.
struct SyntheticSpec {
  int users = 2000;
  int vocab = 400;
  int posts = 20;
  int tokens = 15;
  int block_size = 10;
  double signal_rate = 0.3;  // share of tokens in a post drawn from its view's block
  std::uint64_t seed = 1;
};

/// Token string for synthetic id i ("w" followed by the number).
std::string synthetic_token(int i);

/// Trait labels implied by a user's raw text under the block rule; the
/// generator's labels always equal this.
std::vector<std::uint8_t> synthetic_labels(const RawUser& user, const SyntheticSpec& spec);

std::vector<RawUser> generate_synthetic(const SyntheticSpec& spec);

/// Kaggle-layout CSV of the generated users.
void write_mbti_csv(const std::filesystem::path& path, const std::vector<RawUser>& users);

}  // namespace mvp
