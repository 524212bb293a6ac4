#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvp/dataset.hpp"
#include "mvp/trainer.hpp"

namespace mvp {

/// Operator configuration: a nested JSON document layered over built-in
/// defaults, then dotted-key overrides. Every key must exist in the
/// defaults and keep its type, so typos fail before any work starts.
class CliConfig {
 public:
  CliConfig();

  static const nlohmann::json& defaults();

  /// Overlays a JSON config file.
  void merge_file(const std::filesystem::path& path);
  /// Overlays a parsed document (same validation as merge_file).
  void merge(const nlohmann::json& overlay);
  /// Applies "dotted.key=value". The value is parsed as JSON when possible,
  /// otherwise taken as a string.
  void set(const std::string& assignment);

  const nlohmann::json& tree() const { return tree_; }
  const nlohmann::json& at(const std::string& dotted) const;
  /// Non-empty string or ConfigError naming the key.
  std::string require_string(const std::string& dotted) const;

  std::uint64_t seed() const;
  TrainConfig train_config() const;
  PrepareOptions prepare_options() const;

  std::filesystem::path cache_dir() const;
  std::filesystem::path checkpoint_dir() const;
  std::filesystem::path report_dir() const;
  /// Explicit path under `key`, or checkpoint_dir/best.json when empty.
  std::filesystem::path checkpoint_path(const std::string& key) const;

 private:
  nlohmann::json tree_;
};

}  // namespace mvp
