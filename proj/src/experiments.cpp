#include "mvp/experiments.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "mvp/error.hpp"

namespace mvp {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNoMoe: return "no_moe";
    case Variant::kNoUcr: return "no_ucr";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::kFull;
  if (name == "no_moe") return Variant::kNoMoe;
  if (name == "no_ucr") return Variant::kNoUcr;
  throw ConfigError("unknown ablation variant '" + name + "'");
}

TrainConfig apply_variant(TrainConfig config, Variant v) {
  if (v == Variant::kNoMoe) config.experts = 1;
  if (v == Variant::kNoUcr) config.lambda = 0.0;
  return config;
}

double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::string format_number(double value) {
  if (std::floor(value) == value && std::abs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  return nlohmann::json(value).dump();
}

namespace {

// Runs jobs[i] for every i on up to `workers` threads.
template <typename Job>
void run_parallel(std::size_t count, int workers, Job job) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  const auto n = std::min<std::size_t>(workers, count);
  for (std::size_t w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

SeedResult train_and_test(TrainConfig config, std::uint64_t seed, const ExperimentData& data) {
  config.seed = seed;
  TrainOptions options;
  options.encoder = data.encoder;
  const TrainResult result = train(config, TrainSplits{data.train, data.val, data.test}, data.vocab_size, options);
  if (!result.record.test) throw DataError("experiments need a non-empty test split");
  return SeedResult{seed, *result.record.test};
}

}  // namespace

std::vector<SeedResult> run_seeds(const TrainConfig& config, const std::vector<std::uint64_t>& seeds,
                                  const ExperimentData& data, int workers) {
  std::vector<SeedResult> out(seeds.size());
  run_parallel(seeds.size(), workers, [&](std::size_t i) { out[i] = train_and_test(config, seeds[i], data); });
  return out;
}

AblationRow run_ablation(const TrainConfig& config, Variant variant, const std::vector<std::uint64_t>& seeds,
                         const ExperimentData& data, int workers) {
  AblationRow row;
  row.variant = variant;
  row.runs = run_seeds(apply_variant(config, variant), seeds, data, workers);
  std::vector<double> scores;
  for (const auto& r : row.runs) scores.push_back(r.test.average);
  for (double s : scores) row.mean += s;
  row.mean /= static_cast<double>(std::max<std::size_t>(scores.size(), 1));
  row.stddev = sample_stddev(scores);
  return row;
}

nlohmann::json ablation_to_json(const std::vector<AblationRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : row.runs) runs.push_back({{"seed", r.seed}, {"test", report_to_json(r.test)}});
    out.push_back({{"variant", variant_name(row.variant)},
                   {"mean_f1_avg", row.mean},
                   {"std_f1_avg", row.stddev},
                   {"runs", runs}});
  }
  return out;
}

std::string ablation_to_text(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(10) << "variant" << std::right << std::setw(8) << "seeds" << std::setw(12)
      << "mean F1" << std::setw(10) << "std" << '\n';
  out << std::fixed << std::setprecision(2);
  for (const auto& row : rows) {
    out << std::left << std::setw(10) << variant_name(row.variant) << std::right << std::setw(8) << row.runs.size()
        << std::setw(12) << 100.0 * row.mean << std::setw(10) << 100.0 * row.stddev << '\n';
  }
  return out.str();
}

std::string axis_name(SweepAxis axis) { return axis == SweepAxis::kExperts ? "K" : "lambda"; }

SweepAxis parse_axis(const std::string& name) {
  if (name == "K" || name == "k" || name == "experts") return SweepAxis::kExperts;
  if (name == "lambda") return SweepAxis::kLambda;
  throw ConfigError("unknown sweep axis '" + name + "'");
}

TrainConfig apply_axis(TrainConfig config, SweepAxis axis, double value) {
  if (axis == SweepAxis::kExperts) {
    if (value < 1 || std::floor(value) != value) throw ConfigError("K values must be positive integers");
    config.experts = static_cast<int>(value);
  } else {
    if (value < 0) throw ConfigError("lambda values must be >= 0");
    config.lambda = value;
  }
  return config;
}

std::vector<SweepRow> run_sweep(const TrainConfig& config, SweepAxis axis, const std::vector<double>& values,
                                const std::vector<std::uint64_t>& seeds, const ExperimentData& data, int workers) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  std::vector<SweepRow> rows(values.size() * seeds.size());
  run_parallel(rows.size(), workers, [&](std::size_t i) {
    const double value = values[i / seeds.size()];
    const std::uint64_t seed = seeds[i % seeds.size()];
    const SeedResult r = train_and_test(apply_axis(config, axis, value), seed, data);
    rows[i] = SweepRow{axis, value, seed, r.test};
  });
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "axis,value,seed,f1_EI,f1_SN,f1_TF,f1_JP,f1_avg\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << axis_name(r.axis) << ',' << format_number(r.value) << ',' << r.seed;
    for (double f : r.test.trait_f1) out << ',' << f;
    out << ',' << r.test.average << '\n';
  }
  return out.str();
}

std::string sweep_means_to_csv(const std::vector<SweepRow>& rows) {
  std::vector<double> order;
  std::map<double, std::vector<double>> by_value;
  for (const auto& r : rows) {
    if (!by_value.count(r.value)) order.push_back(r.value);
    by_value[r.value].push_back(r.test.average);
  }
  std::ostringstream out;
  out << "axis,value,runs,mean_f1_avg,std_f1_avg\n";
  out.precision(17);
  const std::string axis = rows.empty() ? "" : axis_name(rows.front().axis);
  for (double v : order) {
    const auto& xs = by_value[v];
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    out << axis << ',' << format_number(v) << ',' << xs.size() << ',' << mean << ',' << sample_stddev(xs) << '\n';
  }
  return out.str();
}

}  // namespace mvp

namespace mvp {

GateUtilization inspect_gates(const MvpModel& model, const Dataset& split, int top) {
  if (split.empty()) throw DataError("cannot inspect gates on an empty split");
  const Eigen::Index k = model.shape.experts;
  GateUtilization g;
  g.weights.resize(static_cast<Eigen::Index>(split.size()), k);
  for (std::size_t i = 0; i < split.size(); ++i) {
    const GateWeights w = gate_weights(model, split[i]);
    g.weights.row(static_cast<Eigen::Index>(i)) = w.g.transpose();
    g.user_ids.push_back(split[i].user_id);
    double h = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (w.g(j) > 0) h -= w.g(j) * std::log(w.g(j));
    }
    g.entropy.push_back(h);
  }
  g.mean = g.weights.colwise().mean().transpose();
  const auto n_top = std::min<std::size_t>(std::max(top, 0), split.size());
  for (Eigen::Index j = 0; j < k; ++j) {
    std::vector<std::size_t> order(split.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return g.weights(static_cast<Eigen::Index>(a), j) > g.weights(static_cast<Eigen::Index>(b), j);
    });
    order.resize(n_top);
    g.top_users.push_back(std::move(order));
  }
  return g;
}

nlohmann::json GateUtilization::to_json() const {
  std::vector<double> sorted = entropy;
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    return sorted[static_cast<std::size_t>(std::round(q * static_cast<double>(sorted.size() - 1)))];
  };
  double mean_entropy = 0.0;
  for (double h : entropy) mean_entropy += h;
  mean_entropy /= static_cast<double>(entropy.size());

  nlohmann::json experts = nlohmann::json::array();
  for (Eigen::Index j = 0; j < mean.size(); ++j) {
    nlohmann::json top = nlohmann::json::array();
    for (auto i : top_users[j]) {
      top.push_back({{"id", user_ids[i]}, {"weight", weights(static_cast<Eigen::Index>(i), j)}});
    }
    experts.push_back({{"expert", j}, {"mean_weight", mean(j)}, {"top_users", top}});
  }
  return {{"users", entropy.size()},
          {"experts", experts},
          {"mean_weight_sum", mean.sum()},
          {"entropy",
           {{"max_possible", std::log(static_cast<double>(mean.size()))},
            {"mean", mean_entropy},
            {"min", sorted.front()},
            {"p25", quantile(0.25)},
            {"median", quantile(0.5)},
            {"p75", quantile(0.75)},
            {"max", sorted.back()}}}};
}

}  // namespace mvp
