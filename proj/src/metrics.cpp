#include "mvp/metrics.hpp"

#include <iomanip>
#include <sstream>

#include "mvp/error.hpp"

namespace mvp {
namespace {

double f1(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  const double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

void ConfusionCounts::add(std::uint8_t truth, std::uint8_t predicted) {
  if (truth) {
    ++(predicted ? tp : fn);
  } else {
    ++(predicted ? fp : tn);
  }
}

double macro_f1(const ConfusionCounts& c) {
  // class 0 swaps the roles: its TP is tn, its FP is fn, its FN is fp
  return 0.5 * (f1(c.tp, c.fp, c.fn) + f1(c.tn, c.fn, c.fp));
}

EvalReport make_report(const std::vector<ConfusionCounts>& counts) {
  EvalReport r;
  r.counts = counts;
  r.users = counts.empty() ? 0 : static_cast<std::size_t>(counts.front().total());
  double sum = 0.0;
  for (const auto& c : counts) {
    r.trait_f1.push_back(macro_f1(c));
    sum += r.trait_f1.back();
  }
  r.average = counts.empty() ? 0.0 : sum / static_cast<double>(counts.size());
  return r;
}

EvalReport evaluate(const MvpModel& model, const Dataset& split) {
  if (split.empty()) throw DataError("cannot evaluate an empty split");
  std::vector<ConfusionCounts> counts(model.shape.traits);
  for (const auto& user : split) {
    if (static_cast<int>(user.labels.size()) != model.shape.traits) {
      throw ShapeError("user " + user.user_id + " has a label count that does not match the checkpoint");
    }
    for (const auto& post : user.posts) {
      for (TokenId id : post.token_ids) {
        if (id >= model.shape.vocab_size) {
          throw ShapeError("user " + user.user_id + " uses token ids beyond the checkpoint vocabulary");
        }
      }
    }
    const TraitDistributions dist = forward_user(model, user, nullptr);
    for (int t = 0; t < model.shape.traits; ++t) counts[t].add(user.labels[t], dist.predicted(t));
  }
  return make_report(counts);
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json traits = nlohmann::json::object();
  for (std::size_t t = 0; t < report.trait_f1.size(); ++t) {
    const std::string name = t < kTraitNames.size() ? std::string(kTraitNames[t]) : "trait" + std::to_string(t);
    const auto& c = report.counts.at(t);
    traits[name] = {{"macro_f1", report.trait_f1[t]}, {"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
  }
  return {{"traits", traits}, {"average_macro_f1", report.average}, {"users", report.users}};
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(8) << "trait" << std::right << std::setw(10) << "F1 (%)" << '\n';
  out << std::fixed << std::setprecision(2);
  for (std::size_t t = 0; t < report.trait_f1.size(); ++t) {
    const std::string name = t < kTraitNames.size() ? std::string(kTraitNames[t]) : "trait" + std::to_string(t);
    out << std::left << std::setw(8) << name << std::right << std::setw(10) << 100.0 * report.trait_f1[t] << '\n';
  }
  out << std::left << std::setw(8) << "average" << std::right << std::setw(10) << 100.0 * report.average << '\n';
  out << std::left << std::setw(8) << "users" << std::right << std::setw(10) << report.users << '\n';
  return out.str();
}

}  // namespace mvp
