#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "mvp/corpus.hpp"
#include "mvp/dataset.hpp"
#include "mvp/error.hpp"
#include "mvp/mbti.hpp"
#include "mvp/vocabulary.hpp"

namespace mvp {
namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mvp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string repeat_words(const std::string& word, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out += (i ? " " : "") + word + std::to_string(i);
  return out;
}

TEST(Labels, KnownCodes) {
  EXPECT_EQ(encode_labels("INTJ"), (TraitLabels{0, 0, 1, 1}));
  EXPECT_EQ(encode_labels("ENFP"), (TraitLabels{1, 0, 0, 0}));
  EXPECT_EQ(encode_labels("estj"), (TraitLabels{1, 1, 1, 1}));
  EXPECT_EQ(encode_labels("IsFp"), (TraitLabels{0, 1, 0, 0}));
}

TEST(Labels, RoundTripAllSixteen) {
  std::set<TraitLabels> seen;
  for (const auto& code : mbti_codes()) {
    const auto labels = encode_labels(code);
    // Independent reading of the letters.
    EXPECT_EQ(labels[0], code[0] == 'E');
    EXPECT_EQ(labels[1], code[1] == 'S');
    EXPECT_EQ(labels[2], code[2] == 'T');
    EXPECT_EQ(labels[3], code[3] == 'J');
    EXPECT_EQ(decode_labels(labels), code);
    seen.insert(labels);
  }
  EXPECT_EQ(seen.size(), 16u);
}

TEST(Labels, RejectsInvalid) {
  EXPECT_THROW(encode_labels("XYZW"), DataError);
  EXPECT_THROW(encode_labels("INT"), DataError);
  EXPECT_THROW(encode_labels(""), DataError);
  EXPECT_THROW(decode_labels({0, 1}), DataError);
}

TEST(Scrub, Examples) {
  EXPECT_EQ(scrub_label_leaks(split_words("As an INTJ I think")),
            (std::vector<std::string>{"as", "an", "i", "think"}));
  EXPECT_EQ(scrub_label_leaks(split_words("enfp vibes")), (std::vector<std::string>{"vibes"}));
  EXPECT_EQ(scrub_label_leaks(split_words("INTJs are")), (std::vector<std::string>{"intjs", "are"}));
  EXPECT_TRUE(scrub_label_leaks(split_words("INTJ. entp, IsFj!")).empty());
}

TEST(Scrub, SplitKeepsUtf8AndLowercases) {
  EXPECT_EQ(split_words("Caf\xc3\xa9 OK-go"), (std::vector<std::string>{"caf\xc3\xa9", "ok", "go"}));
}

TEST(Scrub, IdempotentAndLeakFree) {
  std::mt19937_64 gen(7);
  std::vector<std::string> pool = {"hello", "intj", "ENFP", "world", "x", "Istp", "estjs", "a1"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> tokens;
    const int n = static_cast<int>(gen() % 12);
    for (int i = 0; i < n; ++i) tokens.push_back(pool[gen() % pool.size()]);
    const auto once = scrub_label_leaks(tokens);
    EXPECT_EQ(scrub_label_leaks(once), once);
    for (const auto& t : once) EXPECT_FALSE(is_mbti_code(t));
  }
}

TEST(Corpus, ParsesPostsAndQuotes) {
  const auto users = parse_mbti_csv_text("type,posts\nINTJ,hello|||world\nENFP,\"a, \"\"quoted\"\"\nline\"\n");
  ASSERT_EQ(users.size(), 2u);
  EXPECT_EQ(users[0].user_id, "row-1");
  EXPECT_EQ(users[0].posts(), (std::vector<std::string>{"hello", "world"}));
  EXPECT_EQ(users[1].posts(), (std::vector<std::string>{"a, \"quoted\"\nline"}));
}

TEST(Corpus, ReportsBadRows) {
  try {
    parse_mbti_csv_text("type,posts\nINTJ,fine\nxyzw,text\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("invalid type code at row 2"), std::string::npos) << e.what();
  }
  try {
    parse_mbti_csv_text("type,posts\nINTJ,\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("empty posts field at row 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_mbti_csv_text("kind,text\nINTJ,x\n"), DataError);
  EXPECT_THROW(parse_mbti_csv("/nonexistent/file.csv"), DataError);
}

TEST(Corpus, JsonLines) {
  const auto dir = temp_dir("jsonl");
  std::ofstream(dir / "c.jsonl") << R"({"id":"u1","type":"infp","posts":["one","two"]})" << "\n";
  const auto users = load_corpus(dir / "c.jsonl");
  ASSERT_EQ(users.size(), 1u);
  EXPECT_EQ(users[0].user_id, "u1");
  EXPECT_EQ(users[0].posts().size(), 2u);
}

TEST(Truncation, PostsAndTokens) {
  std::string text;
  for (int i = 0; i < 60; ++i) text += (i ? "|||" : "") + std::string("post") + std::to_string(i);
  const auto many = pretokenize_user({"u", "INTJ", text}, 70, 50);
  ASSERT_TRUE(many);
  ASSERT_EQ(many->posts.size(), 50u);
  EXPECT_EQ(many->posts.front(), (std::vector<std::string>{"post0"}));
  EXPECT_EQ(many->posts.back(), (std::vector<std::string>{"post49"}));

  const auto long_post = pretokenize_user({"u", "INTJ", repeat_words("w", 100)}, 70, 50);
  ASSERT_TRUE(long_post);
  ASSERT_EQ(long_post->posts[0].size(), 70u);
  EXPECT_EQ(long_post->posts[0].back(), "w69");
}

TEST(Truncation, DropsScrubbedPosts) {
  const auto user = pretokenize_user({"u", "INTJ", "INTJ ENTP|||real words"}, 70, 50);
  ASSERT_TRUE(user);
  ASSERT_EQ(user->posts.size(), 1u);
  EXPECT_EQ(user->posts[0], (std::vector<std::string>{"real", "words"}));
  EXPECT_FALSE(pretokenize_user({"u", "INTJ", "intj|||ENFP !!"}, 70, 50));
}

TEST(Splits, Sizes) {
  const SplitSpec spec;
  const auto big = split_sizes(8675, spec);
  EXPECT_EQ(big.train, 5205u);
  EXPECT_EQ(big.val, 1735u);
  EXPECT_EQ(big.test, 1735u);
  const auto small = split_sizes(10, spec);
  EXPECT_EQ(small.train, 6u);
  EXPECT_EQ(small.val, 2u);
  EXPECT_EQ(small.test, 2u);
}

TEST(Splits, DeterministicPartition) {
  std::vector<int> items(101);
  std::iota(items.begin(), items.end(), 0);
  for (std::uint64_t seed : {0ull, 1ull, 42ull}) {
    SplitSpec spec;
    spec.seed = seed;
    const auto a = split_dataset(items, spec);
    const auto b = split_dataset(items, spec);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.val, b.val);
    EXPECT_EQ(a.test, b.test);
    std::vector<int> all;
    for (const auto* part : {&a.train, &a.val, &a.test}) all.insert(all.end(), part->begin(), part->end());
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all, items);
  }
  SplitSpec other;
  other.seed = 1;
  EXPECT_NE(split_dataset(items, SplitSpec{}).train, split_dataset(items, other).train);
}

TEST(Splits, RejectsBadInput) {
  EXPECT_THROW(split_dataset(std::vector<int>{1, 2}, SplitSpec{}), DataError);
  SplitSpec bad{0.5, 0.2, 0.2, 0};
  EXPECT_THROW(bad.validate(), std::exception);
}

TEST(Vocab, OrderingAndMinFrequency) {
  const auto vocab = Vocabulary::from_counts({{"a", 5}, {"b", 5}, {"c", 1}}, 2);
  ASSERT_EQ(vocab.size(), 4u);
  EXPECT_EQ(vocab.token(0), "<pad>");
  EXPECT_EQ(vocab.token(1), "<unk>");
  EXPECT_EQ(vocab.lookup("a"), 2);
  EXPECT_EQ(vocab.lookup("b"), 3);
  EXPECT_EQ(vocab.lookup("c"), Vocabulary::kUnknown);
  EXPECT_EQ(vocab.lookup("never"), Vocabulary::kUnknown);
  EXPECT_EQ(Vocabulary::from_counts({{"a", 5}, {"b", 5}, {"c", 1}}, 1).lookup("c"), 4);
}

TEST(Vocab, SaveLoadRoundTrip) {
  const auto dir = temp_dir("vocab");
  const auto vocab = Vocabulary::from_counts({{"x", 3}, {"y", 9}, {"z", 1}}, 1);
  vocab.save(dir / "v.tsv");
  const auto back = Vocabulary::load(dir / "v.tsv");
  EXPECT_EQ(back, vocab);
  EXPECT_EQ(back.lookup("y"), 2);
}

TEST(Vocab, BuiltFromTrainingSplitOnly) {
  std::vector<RawUser> users;
  const std::array<std::string, 6> words = {"alpha", "beta", "gamma", "delta", "eps", "zeta"};
  for (int i = 0; i < 10; ++i) {
    users.push_back({"u" + std::to_string(i), mbti_codes()[i], words[i % 6] + " shared|||only" + std::to_string(i)});
  }
  const PreparedData data = prepare_dataset(users, PrepareOptions{});
  EXPECT_EQ(data.train.size(), 6u);
  EXPECT_EQ(data.val.size(), 2u);
  EXPECT_EQ(data.test.size(), 2u);
  std::vector<RawUser> train_raw;
  for (const auto& s : data.train) {
    for (const auto& u : users) {
      if (u.user_id == s.user_id) train_raw.push_back(u);
    }
  }
  EXPECT_EQ(data.vocab, build_vocabulary(train_raw, 1));
  for (const auto& s : data.test) {
    const auto& raw = *std::find_if(users.begin(), users.end(), [&](const RawUser& u) { return u.user_id == s.user_id; });
    const std::string own = "only" + raw.user_id.substr(1);
    EXPECT_EQ(data.vocab.lookup(own), Vocabulary::kUnknown);
  }
}

TEST(Pipeline, SkipsDegenerateUsers) {
  std::vector<RawUser> users = {{"a", "INTJ", "one"}, {"b", "ENFP", "two"}, {"c", "ISTP", "three"},
                                {"d", "ESFJ", "INTJ|||entp"}};
  const auto data = prepare_dataset(users, PrepareOptions{});
  EXPECT_EQ(data.skipped, (std::vector<std::string>{"d"}));
  EXPECT_EQ(data.train.size() + data.val.size() + data.test.size(), 3u);
}

TEST(Pipeline, CacheRoundTrip) {
  const auto dir = temp_dir("cache");
  Dataset users = {{"u1", {{{2, 3, 4}}, {{5}}}, {1, 0, 1, 0}}, {"u2", {{{6}}}, {0, 0, 0, 1}}};
  save_split(dir / "train.jsonl", "train", users);
  EXPECT_EQ(load_split(dir / "train.jsonl"), users);
  std::ofstream(dir / "bad.jsonl") << R"({"format":"mvp-split","version":99,"split":"x","count":0})" << "\n";
  EXPECT_THROW(load_split(dir / "bad.jsonl"), DataError);
}

TEST(Pipeline, SampleValidation) {
  UserSample ok{"u", {{{2, 3}}}, {1, 0, 1, 0}};
  EXPECT_NO_THROW(validate_sample(ok, 50, 70, 10));
  UserSample empty_post{"u", {{{}}}, {1, 0, 1, 0}};
  EXPECT_THROW(validate_sample(empty_post, 50, 70, 10), std::exception);
  UserSample out_of_range{"u", {{{12}}}, {1, 0, 1, 0}};
  EXPECT_THROW(validate_sample(out_of_range, 50, 70, 10), std::exception);
  UserSample bad_label{"u", {{{2}}}, {2, 0, 1, 0}};
  EXPECT_THROW(validate_sample(bad_label, 50, 70, 10), std::exception);
}

}  // namespace
}  // namespace mvp
