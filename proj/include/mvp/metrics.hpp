#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvp/dataset.hpp"
#include "mvp/mbti.hpp"
#include "mvp/model.hpp"

namespace mvp {

/// Binary confusion counts for one trait; class 1 is "positive".
struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t tn = 0;

  std::int64_t total() const { return tp + fp + fn + tn; }
  void add(std::uint8_t truth, std::uint8_t predicted);
};

/// Mean of the class-1 and class-0 F1 scores. A class whose precision and
/// recall are both zero scores 0.
double macro_f1(const ConfusionCounts& counts);

/// Per-trait and average Macro-F1, stored as fractions in [0, 1].
struct EvalReport {
  std::vector<double> trait_f1;
  double average = 0.0;
  std::size_t users = 0;
  std::vector<ConfusionCounts> counts;

  bool operator==(const EvalReport& o) const {
    return trait_f1 == o.trait_f1 && average == o.average && users == o.users;
  }
};

EvalReport make_report(const std::vector<ConfusionCounts>& counts);

/// Evaluation-mode predictions (no dropout, no gate noise) over a split.
EvalReport evaluate(const MvpModel& model, const Dataset& split);

nlohmann::json report_to_json(const EvalReport& report);

/// Aligned text table with percentages, one row per trait plus the average.
std::string report_to_text(const EvalReport& report);

}  // namespace mvp
