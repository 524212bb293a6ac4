#include "mvp/synthetic.hpp"

#include <fstream>

#include "mvp/error.hpp"
#include "mvp/mbti.hpp"
#include "mvp/rng.hpp"

namespace mvp {
namespace {

// Block layout: trait t owns ids [2*t*B, 2*t*B + B) for pole 1 and
// [2*t*B + B, 2*(t+1)*B) for pole 0. Ids from 2*T*B on are filler.
int pole_token(int trait, int pole, int j, int block) { return 2 * trait * block + (pole ? 0 : block) + j; }

}  // namespace

std::string synthetic_token(int i) { return "w" + std::to_string(i); }

std::vector<std::uint8_t> synthetic_labels(const RawUser& user, const SyntheticSpec& spec) {
  const int b = spec.block_size;
  std::vector<int> ones(kTraitCount, 0), zeros(kTraitCount, 0);
  for (const auto& post : user.posts()) {
    for (const auto& word : split_words(post)) {
      if (word.size() < 2 || word[0] != 'w') continue;
      const int id = std::stoi(word.substr(1));
      if (id >= 2 * kTraitCount * b) continue;
      const int t = id / (2 * b);
      ((id % (2 * b)) < b ? ones : zeros)[t] += 1;
    }
  }
  std::vector<std::uint8_t> labels(kTraitCount);
  for (int t = 0; t < kTraitCount; ++t) labels[t] = ones[t] > zeros[t] ? 1 : 0;
  return labels;
}

std::vector<RawUser> generate_synthetic(const SyntheticSpec& spec) {
  const int b = spec.block_size;
  const int signal_vocab = 2 * kTraitCount * b;
  if (spec.vocab <= signal_vocab) throw DataError("synthetic vocabulary too small for its trait blocks");
  if (spec.users < 1 || spec.posts < 1 || spec.tokens < 1) throw DataError("synthetic sizes must be positive");

  Rng rng(derive_seed(spec.seed, "synthetic"));
  std::uniform_int_distribution<int> filler(signal_vocab, spec.vocab - 1);
  std::uniform_int_distribution<int> in_block(0, b - 1);
  std::uniform_int_distribution<int> pick_trait(0, kTraitCount - 1);

  std::vector<RawUser> users;
  users.reserve(spec.users);
  for (int u = 0; u < spec.users; ++u) {
    // per-trait lean towards pole 1
    std::vector<double> lean(kTraitCount);
    for (auto& q : lean) q = rng.uniform(0.2, 0.8);

    std::vector<int> ones(kTraitCount, 0), zeros(kTraitCount, 0);
    std::string text;
    for (int p = 0; p < spec.posts; ++p) {
      const int view = pick_trait(rng.engine());
      if (p) text += kPostDelimiter;
      for (int l = 0; l < spec.tokens; ++l) {
        int id;
        if (rng.bernoulli(spec.signal_rate)) {
          const int pole = rng.bernoulli(lean[view]) ? 1 : 0;
          id = pole_token(view, pole, in_block(rng.engine()), b);
          (pole ? ones : zeros)[view] += 1;
        } else {
          id = filler(rng.engine());
        }
        if (l) text += ' ';
        text += synthetic_token(id);
      }
    }
    std::vector<std::uint8_t> labels(kTraitCount);
    for (int t = 0; t < kTraitCount; ++t) labels[t] = ones[t] > zeros[t] ? 1 : 0;
    users.push_back(RawUser{"synth-" + std::to_string(u), decode_labels(labels), std::move(text)});
  }
  return users;
}

void write_mbti_csv(const std::filesystem::path& path, const std::vector<RawUser>& users) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write csv '" + path.string() + "'");
  out << "type,posts\n";
  for (const auto& u : users) {
    std::string quoted;
    for (char c : u.raw_text) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    out << u.type_code << ",\"" << quoted << "\"\n";
  }
}

}  // namespace mvp
