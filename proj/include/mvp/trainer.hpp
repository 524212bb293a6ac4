#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvp/adam.hpp"
#include "mvp/dataset.hpp"
#include "mvp/metrics.hpp"
#include "mvp/model.hpp"

namespace mvp {

/// Hyperparameters of one run. Defaults are the paper-scale settings; see
/// desk_scale() for the small configuration used on a laptop.
struct TrainConfig {
  double lambda = 1.0;
  int experts = 6;
  int max_posts = 50;
  int max_tokens = 70;
  int d_w = 768;
  int d_v = 768;
  double dropout = 0.1;
  double lr_encoder = 2e-5;
  double lr_other = 2e-3;
  int batch_size = 32;
  int max_epochs = 10;
  std::uint64_t seed = 0;
  bool gate_noise = true;  // false freezes the router noise at zero during training

  static TrainConfig desk_scale();
  void validate() const;
  ModelShape shape(int vocab_size) const;
};

nlohmann::json config_to_json(const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  double detection = 0.0;
  double consistency = 0.0;
  double total = 0.0;
  EvalReport validation;
};

struct RunRecord {
  std::vector<EpochRecord> epochs;
  int selected_epoch = 0;  // 1-based; best validation average Macro-F1, earliest on ties
  std::uint64_t seed = 0;
  TrainConfig config;
  std::optional<EvalReport> test;
};

nlohmann::json run_record_to_json(const RunRecord& record);

/// Header and rows of the per-epoch CSV log.
std::string epoch_csv_header();
std::string epoch_csv_row(const EpochRecord& epoch);

struct TrainSplits {
  const Dataset* train = nullptr;
  const Dataset* val = nullptr;
  const Dataset* test = nullptr;  // optional
};

struct TrainOptions {
  /// Replaces the toy encoder (for example with a frozen embedding table).
  std::optional<EmbeddingEncoder> encoder;
  /// Written whenever the validation score improves.
  std::optional<std::filesystem::path> checkpoint_path;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  RunRecord record;
  MvpModel best;
};

/// Joint training with dual forward passes and Adam. Each epoch reshuffles
/// the training split, and the model with the best validation score is kept.
/// Throws NumericError with epoch/batch coordinates on a non-finite loss.
TrainResult train(const TrainConfig& config, const TrainSplits& splits, int vocab_size,
                  const TrainOptions& options = {});

}  // namespace mvp
