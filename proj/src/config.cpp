#include "mvp/config.hpp"

#include <fstream>

#include "mvp/error.hpp"

namespace mvp {

using nlohmann::json;

namespace {

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) {
    // an integer default only accepts integers
    return !(a.is_number_integer() && b.is_number_float());
  }
  return a.type() == b.type();
}

void overlay(json& base, const json& patch, const json& schema, const std::string& prefix) {
  if (!patch.is_object()) throw ConfigError("config section '" + prefix + "' must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!schema.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    const json& expected = schema.at(it.key());
    if (expected.is_object()) {
      overlay(base[it.key()], it.value(), expected, key);
    } else {
      if (!same_kind(expected, it.value())) throw ConfigError("config key '" + key + "' has the wrong type");
      base[it.key()] = it.value();
    }
  }
}

json parse_scalar(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return text;
  }
}

}  // namespace

const json& CliConfig::defaults() {
  static const json d = {
      {"seed", 0},
      {"paths", {{"corpus", ""}, {"cache_dir", "cache"}, {"checkpoint_dir", "checkpoints"}, {"report_dir", "reports"}}},
      {"data",
       {{"max_posts", 50},
        {"max_tokens", 70},
        {"min_frequency", 1},
        {"split", {{"train", 0.6}, {"val", 0.2}, {"test", 0.2}}}}},
      {"model", {{"encoder", "toy"}, {"d_w", 768}, {"d_v", 768}, {"experts", 6}}},
      {"train",
       {{"lambda", 1.0},
        {"dropout", 0.1},
        {"lr_encoder", 2e-5},
        {"lr_other", 2e-3},
        {"batch_size", 32},
        {"max_epochs", 10},
        {"gate_noise", true}}},
      {"eval", {{"split", "test"}, {"checkpoint", ""}}},
      {"predict", {{"input", ""}, {"output", ""}, {"checkpoint", ""}}},
      {"ablate", {{"seeds", {1, 2, 3, 4, 5}}, {"workers", 1}}},
      {"sweep", {{"axis", "K"}, {"values", {1, 2, 4, 6, 8}}, {"seeds", {1}}, {"workers", 1}}},
      {"inspect", {{"split", "test"}, {"checkpoint", ""}, {"top", 5}}},
  };
  return d;
}

CliConfig::CliConfig() : tree_(defaults()) {}

void CliConfig::merge(const json& patch) { overlay(tree_, patch, defaults(), ""); }

void CliConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("malformed config file '" + path.string() + "'");
  }
  merge(j);
}

void CliConfig::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string dotted = assignment.substr(0, eq);
  json patch = parse_scalar(assignment.substr(eq + 1));
  // rebuild the nested object from the dotted path
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    parts.push_back(dotted.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, std::move(patch)}};
  merge(patch);
}

const json& CliConfig::at(const std::string& dotted) const {
  const json* node = &tree_;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (!node->is_object() || !node->contains(key)) throw ConfigError("missing config key '" + dotted + "'");
    node = &node->at(key);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return *node;
}

std::string CliConfig::require_string(const std::string& dotted) const {
  const json& v = at(dotted);
  if (!v.is_string() || v.get<std::string>().empty()) throw ConfigError("missing required config key '" + dotted + "'");
  return v.get<std::string>();
}

std::uint64_t CliConfig::seed() const { return at("seed").get<std::uint64_t>(); }

TrainConfig CliConfig::train_config() const {
  TrainConfig c;
  c.seed = seed();
  c.max_posts = at("data.max_posts");
  c.max_tokens = at("data.max_tokens");
  c.d_w = at("model.d_w");
  c.d_v = at("model.d_v");
  c.experts = at("model.experts");
  c.lambda = at("train.lambda");
  c.dropout = at("train.dropout");
  c.lr_encoder = at("train.lr_encoder");
  c.lr_other = at("train.lr_other");
  c.batch_size = at("train.batch_size");
  c.max_epochs = at("train.max_epochs");
  c.gate_noise = at("train.gate_noise");
  c.validate();
  return c;
}

PrepareOptions CliConfig::prepare_options() const {
  PrepareOptions o;
  o.max_posts = at("data.max_posts");
  o.max_tokens = at("data.max_tokens");
  o.min_frequency = at("data.min_frequency");
  o.split.train = at("data.split.train");
  o.split.val = at("data.split.val");
  o.split.test = at("data.split.test");
  o.split.seed = seed();
  if (o.max_posts < 1 || o.max_tokens < 1) throw ConfigError("data.max_posts and data.max_tokens must be >= 1");
  o.split.validate();
  return o;
}

std::filesystem::path CliConfig::cache_dir() const { return at("paths.cache_dir").get<std::string>(); }
std::filesystem::path CliConfig::checkpoint_dir() const { return at("paths.checkpoint_dir").get<std::string>(); }
std::filesystem::path CliConfig::report_dir() const { return at("paths.report_dir").get<std::string>(); }

std::filesystem::path CliConfig::checkpoint_path(const std::string& key) const {
  const std::string explicit_path = at(key).get<std::string>();
  return explicit_path.empty() ? checkpoint_dir() / "best.json" : std::filesystem::path(explicit_path);
}

}  // namespace mvp
