#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mvp/checkpoint.hpp"
#include "mvp/commands.hpp"
#include "mvp/config.hpp"
#include "mvp/corpus.hpp"
#include "mvp/error.hpp"
#include "mvp/rng.hpp"

namespace mvp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("mvp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }

  std::vector<std::string> base_args(const fs::path& dir) const {
    return {"--set", "paths.corpus=" + std::string(MVP_FIXTURE_DIR) + "/kaggle10.csv",
            "--set", "paths.cache_dir=" + (dir / "cache").string(),
            "--set", "paths.checkpoint_dir=" + (dir / "ckpt").string(),
            "--set", "paths.report_dir=" + (dir / "reports").string(),
            "--set", "model.d_w=8",
            "--set", "model.d_v=8",
            "--set", "model.experts=3",
            "--set", "train.max_epochs=2",
            "--set", "train.batch_size=4",
            "--set", "train.lr_encoder=0.002"};
  }

  CliResult run(std::vector<std::string> args, const fs::path& dir) const {
    auto full = base_args(dir);
    full.insert(full.end(), args.begin(), args.end());
    std::ostringstream out, err;
    const int code = run_cli(full, out, err);
    return {code, out.str(), err.str()};
  }

  CliResult run(std::vector<std::string> args) const { return run(std::move(args), root_); }

  static json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
  }

  fs::path root_;
};

TEST(Config, RejectsUnknownKeysAnywhere) {
  CliConfig c;
  EXPECT_THROW(c.set("train.lamda=1"), ConfigError);
  EXPECT_THROW(c.set("bogus=1"), ConfigError);
  EXPECT_THROW(c.merge(json{{"data", {{"split", {{"tarin", 0.5}}}}}}), ConfigError);
  EXPECT_THROW(c.set("train.batch_size=\"big\""), ConfigError);
  try {
    c.set("model.widht=3");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("model.widht"), std::string::npos);
  }
}

TEST(Config, MissingRequiredKeyIsNamed) {
  CliConfig c;
  try {
    c.require_string("paths.corpus");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("paths.corpus"), std::string::npos);
  }
}

TEST(Config, DefaultsAndOverrides) {
  CliConfig c;
  const TrainConfig t = c.train_config();
  EXPECT_EQ(t.lambda, 1.0);
  EXPECT_EQ(t.experts, 6);
  EXPECT_EQ(t.batch_size, 32);
  EXPECT_EQ(t.max_epochs, 10);
  EXPECT_EQ(t.lr_encoder, 2e-5);
  EXPECT_EQ(t.lr_other, 2e-3);
  c.set("train.lambda=0.5");
  c.set("seed=9");
  EXPECT_EQ(c.train_config().lambda, 0.5);
  EXPECT_EQ(c.train_config().seed, 9u);
  EXPECT_EQ(c.prepare_options().split.seed, 9u);
}

TEST(Config, FileThenOverrides) {
  const auto path = fs::temp_directory_path() / "mvp_cfg.json";
  std::ofstream(path) << R"({"train": {"lambda": 2.0, "dropout": 0.2}, "model": {"experts": 4}})";
  CliConfig c;
  c.merge_file(path);
  c.set("train.lambda=3");
  EXPECT_EQ(c.train_config().lambda, 3.0);
  EXPECT_EQ(c.train_config().dropout, 0.2);
  EXPECT_EQ(c.train_config().experts, 4);
}

TEST_F(CliTest, PrepareWritesManifestAndIsIdempotent) {
  const auto first = run({"prepare"});
  ASSERT_EQ(first.code, 0) << first.err;
  const auto manifest = read_json(root_ / "cache" / "manifest.json");
  EXPECT_EQ(manifest["users"], 10);
  EXPECT_EQ(manifest["splits"]["train"], 6);
  EXPECT_EQ(manifest["splits"]["val"], 2);
  EXPECT_EQ(manifest["splits"]["test"], 2);
  EXPECT_EQ(manifest["seed"], 0);
  const auto stamp = fs::last_write_time(root_ / "cache" / "train.jsonl");
  const auto second = run({"prepare"});
  ASSERT_EQ(second.code, 0);
  EXPECT_NE(second.out.find("cache up to date"), std::string::npos);
  EXPECT_EQ(fs::last_write_time(root_ / "cache" / "train.jsonl"), stamp);
  const auto reseeded = run({"--seed", "4", "prepare"});
  EXPECT_EQ(reseeded.out.find("cache up to date"), std::string::npos);
}

TEST_F(CliTest, ErrorsAreSingleLines) {
  auto r = run({"--set", "train.bogus=1", "train"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("mvp: error: config:", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

  r = run({"train"});  // nothing prepared yet
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("mvp: error: data:", 0), 0u) << r.err;

  std::ostringstream out, err;
  EXPECT_EQ(run_cli({"prepare"}, out, err), 2);
  EXPECT_NE(err.str().find("paths.corpus"), std::string::npos);
  EXPECT_EQ(run_cli({"frobnicate"}, out, err), 2);
}

TEST_F(CliTest, TrainEvalRoundTripAndByteIdenticalOutputs) {
  ASSERT_EQ(run({"prepare"}).code, 0);
  const auto trained = run({"train"});
  ASSERT_EQ(trained.code, 0) << trained.err;
  const auto record = read_json(root_ / "reports" / "train_run.json");
  EXPECT_TRUE(fs::exists(root_ / "reports" / "train_run.json.meta.json"));
  const int selected = record["selected_epoch"];

  const auto evaluated = run({"--set", "eval.split=val", "eval"});
  ASSERT_EQ(evaluated.code, 0) << evaluated.err;
  const auto eval = read_json(root_ / "reports" / "eval_val.json");
  const auto& stored = record["epochs"][selected - 1]["validation"];
  EXPECT_EQ(eval["average_macro_f1"], stored["average_macro_f1"]);
  EXPECT_EQ(eval["traits"], stored["traits"]);

  // A second tree with the same config must match byte for byte.
  const fs::path other = root_ / "again";
  ASSERT_EQ(run({"prepare"}, other).code, 0);
  ASSERT_EQ(run({"train"}, other).code, 0);
  ASSERT_EQ(run({"--set", "eval.split=val", "eval"}, other).code, 0);
  for (const char* f : {"reports/train_run.json", "reports/train_epochs.csv", "reports/eval_val.json",
                        "ckpt/best.json", "cache/train.jsonl", "cache/vocab.tsv", "cache/manifest.json"}) {
    EXPECT_EQ(read_file(root_ / f), read_file(other / f)) << f;
  }
}

TEST_F(CliTest, PredictWritesOneLinePerUser) {
  ASSERT_EQ(run({"prepare"}).code, 0);
  ASSERT_EQ(run({"train"}).code, 0);
  std::ofstream(root_ / "in.jsonl") << R"({"id":"a","posts":["hello music","idea plan INTJ"]})" << "\n"
                                    << R"({"id":"b","posts":["ENFP"]})" << "\n";
  const auto r = run({"--set", "predict.input=" + (root_ / "in.jsonl").string(), "--set",
                      "predict.output=" + (root_ / "out.jsonl").string(), "predict"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(root_ / "out.jsonl");
  std::string line;
  std::getline(in, line);
  const auto a = json::parse(line);
  EXPECT_EQ(a["id"], "a");
  for (const char* t : {"EI", "SN", "TF", "JP"}) {
    const double p = a["p_first_pole"][t];
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
  EXPECT_EQ(a["type"].get<std::string>().size(), 4u);
  std::getline(in, line);
  EXPECT_EQ(json::parse(line)["skipped"], true);
}

TEST_F(CliTest, AblateEmitsThreeRows) {
  ASSERT_EQ(run({"prepare"}).code, 0);
  const auto r = run({"--set", "ablate.seeds=[1,2]", "ablate"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = read_json(root_ / "reports" / "ablation.json");
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[0]["variant"], "full");
  EXPECT_EQ(table[1]["variant"], "no_moe");
  EXPECT_EQ(table[2]["variant"], "no_ucr");
}

TEST_F(CliTest, SweepWritesCsv) {
  ASSERT_EQ(run({"prepare"}).code, 0);
  const auto r = run({"--set", "sweep.axis=lambda", "--set", "sweep.values=[0,1]", "--set", "sweep.seeds=[1,2]",
                      "sweep"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(root_ / "reports" / "sweep_lambda.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST_F(CliTest, GateInspection) {
  ASSERT_EQ(run({"prepare"}).code, 0);
  const auto manifest = read_json(root_ / "cache" / "manifest.json");
  // Freshly initialized checkpoints: near-uniform routing, and K = 1.
  for (int k : {3, 1}) {
    ModelShape shape;
    shape.vocab_size = manifest["vocab_size"];
    shape.d_w = 8;
    shape.d_v = 8;
    shape.experts = k;
    Rng rng(1);
    const auto path = root_ / ("fresh" + std::to_string(k) + ".json");
    save_checkpoint(path, MvpModel::initialize(shape, rng));
    const auto r = run({"--set", "inspect.checkpoint=" + path.string(), "--set", "inspect.split=train",
                        "inspect-gates"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = read_json(root_ / "reports" / "gates_train.json");
    std::vector<double> mean;
    for (const auto& e : report["experts"]) mean.push_back(e["mean_weight"]);
    ASSERT_EQ(mean.size(), static_cast<std::size_t>(k));
    double sum = 0.0;
    for (double m : mean) {
      sum += m;
      EXPECT_LT(std::abs(m - 1.0 / k), 0.05);
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
    if (k == 1) EXPECT_EQ(mean[0], 1.0);
  }
}

}  // namespace
}  // namespace mvp
