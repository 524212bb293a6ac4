#include "mvp/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mvp/error.hpp"
#include "mvp/mbti.hpp"

namespace mvp {

Vocabulary::Vocabulary() {
  append(kPadToken, 0);
  append(kUnknownToken, 0);
}

void Vocabulary::append(std::string token, std::int64_t count) {
  const auto id = static_cast<TokenId>(tokens_.size());
  if (!index_.emplace(token, id).second) throw DataError("duplicate vocabulary token '" + token + "'");
  tokens_.push_back(std::move(token));
  counts_.push_back(count);
}

Vocabulary Vocabulary::from_counts(const std::unordered_map<std::string, std::int64_t>& counts, int min_frequency) {
  if (min_frequency < 1) throw DataError("min_frequency must be >= 1");
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (const auto& [tok, n] : counts) {
    if (n >= min_frequency && tok != kPadToken && tok != kUnknownToken) kept.emplace_back(tok, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Vocabulary vocab;
  vocab.min_frequency_ = min_frequency;
  for (auto& [tok, n] : kept) vocab.append(std::move(tok), n);
  return vocab;
}

TokenId Vocabulary::lookup(const std::string& token) const {
  const auto it = index_.find(token);
  return it == index_.end() ? kUnknown : it->second;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary to '" + path.string() + "'");
  out << "#min_frequency\t" << min_frequency_ << '\n';
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << i << '\t' << counts_[i] << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary '" + path.string() + "'");
  Vocabulary vocab;
  vocab.tokens_.clear();
  vocab.counts_.clear();
  vocab.index_.clear();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token, index, count;
    if (!std::getline(fields, token, '\t') || !std::getline(fields, index, '\t')) {
      throw DataError("malformed vocabulary line " + std::to_string(lineno));
    }
    if (token == "#min_frequency") {
      vocab.min_frequency_ = std::stoi(index);
      continue;
    }
    std::getline(fields, count, '\t');
    if (std::stoll(index) != static_cast<long long>(vocab.tokens_.size())) {
      throw DataError("vocabulary indices not contiguous at line " + std::to_string(lineno));
    }
    vocab.append(token, count.empty() ? 0 : std::stoll(count));
  }
  if (vocab.size() < 2 || vocab.tokens_[kPad] != kPadToken || vocab.tokens_[kUnknown] != kUnknownToken) {
    throw DataError("vocabulary must start with <pad> and <unk>");
  }
  return vocab;
}

Vocabulary build_vocabulary(const std::vector<RawUser>& train_users, int min_frequency) {
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& user : train_users) {
    for (const auto& post : user.posts()) {
      for (auto& tok : scrub_label_leaks(split_words(post))) ++counts[tok];
    }
  }
  if (counts.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  return Vocabulary::from_counts(counts, min_frequency);
}

}  // namespace mvp
