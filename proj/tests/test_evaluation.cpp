#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mvp/experiments.hpp"
#include "mvp/metrics.hpp"
#include "mvp/synthetic.hpp"
#include "support/random_model.hpp"

namespace mvp {
namespace {

// Direct per-class precision/recall from prediction lists.
double brute_force_macro_f1(const std::vector<int>& truth, const std::vector<int>& pred) {
  double total = 0.0;
  for (int cls : {0, 1}) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (pred[i] == cls && truth[i] == cls) tp += 1;
      if (pred[i] == cls && truth[i] != cls) fp += 1;
      if (pred[i] != cls && truth[i] == cls) fn += 1;
    }
    const double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    total += precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  }
  return total / 2;
}

ConfusionCounts count(const std::vector<int>& truth, const std::vector<int>& pred) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) c.add(truth[i], pred[i]);
  return c;
}

TEST(MacroF1, HandExamples) {
  EXPECT_DOUBLE_EQ(macro_f1({2, 0, 0, 2}), 1.0);
  EXPECT_NEAR(macro_f1({2, 2, 0, 0}), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(macro_f1({3, 1, 1, 5}), 0.5 * (0.75 + 5.0 / 6.0), 1e-15);
  EXPECT_NEAR(macro_f1({3, 1, 1, 5}), 0.7917, 1e-4);
}

TEST(MacroF1, MatchesBruteForce) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + gen() % 40;
    const double bias = static_cast<double>(gen() % 100) / 100.0;
    std::bernoulli_distribution coin(bias);
    std::vector<int> truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = coin(gen);
      pred[i] = coin(gen);
    }
    EXPECT_NEAR(macro_f1(count(truth, pred)), brute_force_macro_f1(truth, pred), 1e-12);
    std::vector<int> flipped_truth(n), flipped_pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      flipped_truth[i] = 1 - truth[i];
      flipped_pred[i] = 1 - pred[i];
    }
    EXPECT_NEAR(macro_f1(count(flipped_truth, flipped_pred)), macro_f1(count(truth, pred)), 1e-15);
  }
}

TEST(MacroF1, ReportAverageIsExact) {
  const auto r = make_report({{2, 2, 0, 0}, {3, 1, 1, 5}, {1, 0, 0, 1}, {0, 1, 1, 0}});
  EXPECT_EQ(r.average, (r.trait_f1[0] + r.trait_f1[1] + r.trait_f1[2] + r.trait_f1[3]) / 4.0);
  const std::string text = report_to_text(r);
  EXPECT_NE(text.find("EI"), std::string::npos);
  EXPECT_NE(text.find("%"), std::string::npos);
  EXPECT_EQ(report_to_json(r)["average_macro_f1"].get<double>(), r.average);
}

TEST(Evaluate, TiePredictsClassZero) {
  const auto shape = testing::small_shape();
  Rng rng(2);
  MvpModel model = MvpModel::initialize(shape, rng);
  model.head = TraitHeadParams::zeros(shape.d_v, shape.traits);
  Dataset users = testing::random_dataset(shape, rng, 12);
  for (auto& u : users) u.labels = {0, 0, 0, 0};
  users[0].labels = {1, 1, 1, 1};
  const auto report = evaluate(model, users);
  for (const auto& c : report.counts) {
    EXPECT_EQ(c.tp + c.fp, 0);
    EXPECT_EQ(c.tn, 11);
    EXPECT_EQ(c.fn, 1);
  }
}

TEST(Evaluate, DeterministicAndChecked) {
  const auto shape = testing::small_shape();
  Rng rng(3);
  const MvpModel model = testing::random_model(shape, 4);
  const Dataset users = testing::random_dataset(shape, rng, 20);
  EXPECT_EQ(evaluate(model, users), evaluate(model, users));
  EXPECT_EQ(evaluate(model, users).users, 20u);
  Dataset bad = users;
  bad[0].posts[0].token_ids[0] = shape.vocab_size + 5;
  EXPECT_THROW(evaluate(model, bad), ShapeError);
  EXPECT_THROW(evaluate(model, Dataset{}), DataError);
}

TEST(Variants, Definitions) {
  const auto base = TrainConfig::desk_scale();
  EXPECT_EQ(apply_variant(base, Variant::kNoMoe).experts, 1);
  EXPECT_EQ(apply_variant(base, Variant::kNoMoe).lambda, base.lambda);
  EXPECT_EQ(apply_variant(base, Variant::kNoUcr).lambda, 0.0);
  EXPECT_EQ(apply_variant(base, Variant::kNoUcr).experts, base.experts);
  for (auto v : {Variant::kFull, Variant::kNoMoe, Variant::kNoUcr}) EXPECT_EQ(parse_variant(variant_name(v)), v);
  EXPECT_THROW(parse_variant("no_gate"), std::exception);
  EXPECT_EQ(apply_axis(base, SweepAxis::kExperts, 4).experts, 4);
  EXPECT_EQ(apply_axis(base, SweepAxis::kLambda, 2.5).lambda, 2.5);
  EXPECT_EQ(parse_axis("K"), SweepAxis::kExperts);
  EXPECT_EQ(parse_axis("lambda"), SweepAxis::kLambda);
}

TEST(Variants, SingleExpertGateIsConstant) {
  auto shape = testing::small_shape(1);
  const MvpModel model = testing::random_model(shape, 5);
  Rng rng(6);
  for (const auto& u : testing::random_dataset(shape, rng, 10)) EXPECT_EQ(gate_weights(model, u).g(0), 1.0);
}

TEST(Statistics, SampleStddev) {
  EXPECT_EQ(sample_stddev({0.5}), 0.0);
  EXPECT_NEAR(sample_stddev({1.0, 2.0, 3.0, 4.0}), std::sqrt(5.0 / 3.0), 1e-15);
}

struct Harness : ::testing::Test {
  static const PreparedData& data() {
    static const PreparedData d = [] {
      SyntheticSpec spec;
      spec.users = 40;
      spec.vocab = 50;
      spec.posts = 3;
      spec.tokens = 5;
      spec.block_size = 3;
      PrepareOptions o;
      o.max_posts = 3;
      o.max_tokens = 5;
      return prepare_dataset(generate_synthetic(spec), o);
    }();
    return d;
  }
  static TrainConfig config() {
    auto c = TrainConfig::desk_scale();
    c.d_w = 6;
    c.d_v = 6;
    c.experts = 2;
    c.max_posts = 3;
    c.max_tokens = 5;
    c.batch_size = 8;
    c.max_epochs = 2;
    return c;
  }
  static ExperimentData experiment() {
    return {&data().train, &data().val, &data().test, static_cast<int>(data().vocab.size()), std::nullopt};
  }
};

TEST_F(Harness, SweepCardinalityAndOverlap) {
  const std::vector<std::uint64_t> seeds = {1, 2};
  const auto rows = run_sweep(config(), SweepAxis::kLambda, {0.0, 1.0, 5.0}, seeds, experiment());
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].value, 0.0);
  EXPECT_EQ(rows[1].value, 0.0);
  EXPECT_EQ(rows[1].seed, 2u);
  const auto no_ucr = run_ablation(config(), Variant::kNoUcr, seeds, experiment());
  EXPECT_EQ(rows[0].test, no_ucr.runs[0].test);
  EXPECT_EQ(rows[1].test, no_ucr.runs[1].test);

  const std::string csv = sweep_to_csv(rows);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "axis,value,seed,f1_EI,f1_SN,f1_TF,f1_JP,f1_avg");
  int count = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7) << line;
    EXPECT_EQ(line.substr(0, 7), "lambda,");
    ++count;
  }
  EXPECT_EQ(count, 6);
  const std::string means = sweep_means_to_csv(rows);
  EXPECT_EQ(means.substr(0, means.find('\n')), "axis,value,runs,mean_f1_avg,std_f1_avg");
  EXPECT_EQ(std::count(means.begin(), means.end(), '\n'), 4);
}

TEST_F(Harness, ParallelWorkersMatchSerial) {
  const std::vector<std::uint64_t> seeds = {3, 4, 5};
  const auto serial = run_seeds(config(), seeds, experiment(), 1);
  const auto parallel = run_seeds(config(), seeds, experiment(), 3);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].seed, parallel[i].seed);
    EXPECT_EQ(serial[i].test, parallel[i].test);
  }
}

TEST_F(Harness, AblationTable) {
  std::vector<AblationRow> rows;
  for (auto v : {Variant::kFull, Variant::kNoMoe, Variant::kNoUcr}) {
    rows.push_back(run_ablation(config(), v, {1, 2}, experiment()));
  }
  const auto j = ablation_to_json(rows);
  ASSERT_EQ(j.size(), 3u);
  for (const auto& row : rows) {
    EXPECT_EQ(row.runs.size(), 2u);
    EXPECT_DOUBLE_EQ(row.mean, 0.5 * (row.runs[0].test.average + row.runs[1].test.average));
  }
  EXPECT_NE(ablation_to_text(rows).find("no_moe"), std::string::npos);
}

TEST_F(Harness, GateInspection) {
  Rng rng(7);
  auto shape = config().shape(static_cast<int>(data().vocab.size()));
  shape.experts = 4;
  const MvpModel fresh = MvpModel::initialize(shape, rng);
  const auto util = inspect_gates(fresh, data().val, 3);
  EXPECT_NEAR(util.mean.sum(), 1.0, 1e-6);
  EXPECT_LT((util.mean.array() - 0.25).abs().maxCoeff(), 0.05);
  EXPECT_EQ(util.weights.rows(), static_cast<Eigen::Index>(data().val.size()));
  for (const auto& top : util.top_users) EXPECT_LE(top.size(), 3u);
  for (double h : util.entropy) EXPECT_LE(h, std::log(4.0) + 1e-12);

  shape.experts = 1;
  const auto single = inspect_gates(MvpModel::initialize(shape, rng), data().val, 3);
  EXPECT_TRUE((single.weights.array() == 1.0).all());
  EXPECT_EQ(single.mean(0), 1.0);
}

}  // namespace
}  // namespace mvp
