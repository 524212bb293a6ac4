#include "mvp/dataset.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace mvp {

using nlohmann::json;

void validate_sample(const UserSample& sample, int max_posts, int max_tokens, std::size_t vocab_size) {
  if (sample.posts.empty() || sample.posts.size() > static_cast<std::size_t>(max_posts)) {
    throw DataError("user " + sample.user_id + " has " + std::to_string(sample.posts.size()) + " posts");
  }
  if (sample.labels.size() != kTraitCount) throw DataError("user " + sample.user_id + " needs 4 labels");
  for (auto y : sample.labels) {
    if (y > 1) throw DataError("user " + sample.user_id + " has a non-binary label");
  }
  for (const auto& post : sample.posts) {
    if (post.length() < 1 || post.length() > static_cast<std::size_t>(max_tokens)) {
      throw DataError("user " + sample.user_id + " has a post of length " + std::to_string(post.length()));
    }
    for (TokenId id : post.token_ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
        throw DataError("user " + sample.user_id + " has token id " + std::to_string(id) + " outside vocabulary");
      }
    }
  }
}

std::optional<WordUser> pretokenize_posts(std::string user_id, const std::vector<std::string>& posts,
                                          int max_tokens, int max_posts) {
  WordUser user{std::move(user_id), {}, {}};
  for (const auto& text : posts) {
    if (user.posts.size() >= static_cast<std::size_t>(max_posts)) break;
    auto words = scrub_label_leaks(split_words(text));
    if (words.empty()) continue;
    if (words.size() > static_cast<std::size_t>(max_tokens)) words.resize(max_tokens);
    user.posts.push_back(std::move(words));
  }
  if (user.posts.empty()) return std::nullopt;
  return user;
}

std::optional<WordUser> pretokenize_user(const RawUser& raw, int max_tokens, int max_posts) {
  TraitLabels labels = encode_labels(raw.type_code);
  auto user = pretokenize_posts(raw.user_id, raw.posts(), max_tokens, max_posts);
  if (user) user->labels = std::move(labels);
  return user;
}

UserSample index_user(const WordUser& user, const Vocabulary& vocab) {
  UserSample sample{user.user_id, {}, user.labels};
  sample.posts.reserve(user.posts.size());
  for (const auto& words : user.posts) {
    TokenizedPost post;
    post.token_ids.reserve(words.size());
    for (const auto& w : words) post.token_ids.push_back(vocab.lookup(w));
    sample.posts.push_back(std::move(post));
  }
  return sample;
}

std::optional<UserSample> tokenize_user(const RawUser& raw, const Vocabulary& vocab, int max_tokens,
                                        int max_posts) {
  auto words = pretokenize_user(raw, max_tokens, max_posts);
  if (!words) return std::nullopt;
  return index_user(*words, vocab);
}

void SplitSpec::validate() const {
  if (!(train > 0 && val > 0 && test > 0)) throw DataError("split ratios must all be positive");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw DataError("split ratios must sum to 1");
}

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  // The small epsilon keeps exact products such as 8675 * 0.2 from rounding
  // down one user because of binary representation error.
  auto cut = [n](double ratio) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratio + 1e-9));
  };
  SplitSizes s;
  s.val = cut(spec.val);
  s.test = cut(spec.test);
  s.train = n - s.val - s.test;
  return s;
}

std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "split"));
  std::shuffle(order.begin(), order.end(), rng.engine());
  return order;
}

PreparedData prepare_dataset(const std::vector<RawUser>& users, const PrepareOptions& options) {
  PreparedData out;
  std::vector<WordUser> kept;
  std::vector<const RawUser*> kept_raw;
  for (const auto& raw : users) {
    auto words = pretokenize_user(raw, options.max_tokens, options.max_posts);
    if (!words) {
      out.skipped.push_back(raw.user_id);
      continue;
    }
    kept.push_back(std::move(*words));
    kept_raw.push_back(&raw);
  }
  std::vector<std::size_t> index(kept.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  const Splits<std::size_t> parts = split_dataset(index, options.split);

  std::vector<RawUser> train_raw;
  train_raw.reserve(parts.train.size());
  for (auto i : parts.train) train_raw.push_back(*kept_raw[i]);
  out.vocab = build_vocabulary(train_raw, options.min_frequency);

  auto materialize = [&](const std::vector<std::size_t>& ids, Dataset& dst) {
    dst.reserve(ids.size());
    for (auto i : ids) dst.push_back(index_user(kept[i], out.vocab));
  };
  materialize(parts.train, out.train);
  materialize(parts.val, out.val);
  materialize(parts.test, out.test);
  return out;
}

void save_split(const std::filesystem::path& path, const std::string& split_name, const Dataset& users) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write split cache '" + path.string() + "'");
  out << json{{"format", "mvp-split"}, {"version", kCacheVersion}, {"split", split_name}, {"count", users.size()}}
             .dump()
      << '\n';
  for (const auto& u : users) {
    json posts = json::array();
    for (const auto& p : u.posts) posts.push_back(p.token_ids);
    out << json{{"id", u.user_id}, {"labels", u.labels}, {"posts", std::move(posts)}}.dump() << '\n';
  }
}

Dataset load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split cache '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty split cache '" + path.string() + "'");
  const json header = json::parse(line);
  if (header.value("format", "") != "mvp-split" || header.value("version", 0) != kCacheVersion) {
    throw DataError("unsupported split cache header in '" + path.string() + "'");
  }
  Dataset users;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    UserSample u;
    u.user_id = j.at("id").get<std::string>();
    u.labels = j.at("labels").get<TraitLabels>();
    for (const auto& p : j.at("posts")) u.posts.push_back(TokenizedPost{p.get<std::vector<TokenId>>()});
    users.push_back(std::move(u));
  }
  if (users.size() != header.at("count").get<std::size_t>()) {
    throw DataError("split cache '" + path.string() + "' is truncated");
  }
  return users;
}

}  // namespace mvp
