#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvp/trainer.hpp"

namespace mvp {

enum class Variant { kFull, kNoMoe, kNoUcr };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

/// no_moe keeps a single whitening expert (K = 1); no_ucr sets lambda to 0.
TrainConfig apply_variant(TrainConfig config, Variant v);

struct SeedResult {
  std::uint64_t seed = 0;
  EvalReport test;
};

struct AblationRow {
  Variant variant = Variant::kFull;
  std::vector<SeedResult> runs;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single seed
};

struct ExperimentData {
  const Dataset* train = nullptr;
  const Dataset* val = nullptr;
  const Dataset* test = nullptr;
  int vocab_size = 0;
  std::optional<EmbeddingEncoder> encoder;
};

/// Trains one model per seed and scores it on the test split. Runs are
/// independent, so up to `workers` of them execute concurrently; results are
/// ordered by seed position regardless.
std::vector<SeedResult> run_seeds(const TrainConfig& config, const std::vector<std::uint64_t>& seeds,
                                  const ExperimentData& data, int workers = 1);

AblationRow run_ablation(const TrainConfig& config, Variant variant, const std::vector<std::uint64_t>& seeds,
                         const ExperimentData& data, int workers = 1);

nlohmann::json ablation_to_json(const std::vector<AblationRow>& rows);
std::string ablation_to_text(const std::vector<AblationRow>& rows);

enum class SweepAxis { kExperts, kLambda };

std::string axis_name(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);
TrainConfig apply_axis(TrainConfig config, SweepAxis axis, double value);

struct SweepRow {
  SweepAxis axis = SweepAxis::kExperts;
  double value = 0.0;
  std::uint64_t seed = 0;
  EvalReport test;
};

/// One train+evaluate per (value, seed), rows ordered value-major.
std::vector<SweepRow> run_sweep(const TrainConfig& config, SweepAxis axis, const std::vector<double>& values,
                                const std::vector<std::uint64_t>& seeds, const ExperimentData& data,
                                int workers = 1);

/// Header `axis,value,seed,f1_EI,f1_SN,f1_TF,f1_JP,f1_avg`, one row per run.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
/// Header `axis,value,runs,mean_f1_avg,std_f1_avg`, one row per value.
std::string sweep_means_to_csv(const std::vector<SweepRow>& rows);

double sample_stddev(const std::vector<double>& xs);
std::string format_number(double value);

}  // namespace mvp

namespace mvp {

/// Evaluation-mode router statistics over a split.
struct GateUtilization {
  Mat weights;  // users x K
  std::vector<std::string> user_ids;
  Vec mean;                      // per expert
  std::vector<double> entropy;   // per user, natural log
  std::vector<std::vector<std::size_t>> top_users;  // per expert, row indices by descending weight

  nlohmann::json to_json() const;
};

GateUtilization inspect_gates(const MvpModel& model, const Dataset& split, int top);

}  // namespace mvp
