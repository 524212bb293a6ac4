#include "mvp/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mvp/checkpoint.hpp"
#include "mvp/corpus.hpp"
#include "mvp/error.hpp"
#include "mvp/experiments.hpp"

namespace mvp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kManifestVersion = 1;

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

// Timestamps live in a sidecar so the primary outputs stay byte-identical
// across repeated runs.
void write_meta(const fs::path& primary, const std::string& command) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  write_text(fs::path(primary.string() + ".meta.json"),
             json{{"command", command}, {"finished_at", stamp}, {"output", primary.filename().string()}}.dump(2) +
                 "\n");
}

struct Cache {
  Vocabulary vocab;
  Dataset train;
  Dataset val;
  Dataset test;

  const Dataset& split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "val") return val;
    if (name == "test") return test;
    throw ConfigError("unknown split '" + name + "'");
  }
};

Cache load_cache(const CliConfig& config) {
  const fs::path dir = config.cache_dir();
  if (!fs::exists(dir / "manifest.json")) {
    throw DataError("no prepared cache in '" + dir.string() + "'; run `mvp prepare` first");
  }
  return Cache{Vocabulary::load(dir / "vocab.tsv"), load_split(dir / "train.jsonl"), load_split(dir / "val.jsonl"),
               load_split(dir / "test.jsonl")};
}

std::optional<EmbeddingEncoder> encoder_from_config(const CliConfig& config, const Vocabulary& vocab) {
  const std::string choice = config.at("model.encoder").get<std::string>();
  if (choice == "toy") return std::nullopt;
  if (choice.rfind("frozen:", 0) == 0) {
    return EmbeddingEncoder::frozen(choice.substr(7), vocab, config.at("model.d_w").get<int>());
  }
  throw ConfigError("model.encoder must be 'toy' or 'frozen:<path>'");
}

MvpModel load_model_for(const fs::path& path, const Cache& cache) {
  MvpModel model = load_checkpoint(path);
  if (model.shape.vocab_size != static_cast<int>(cache.vocab.size())) {
    throw ShapeError("checkpoint vocabulary (" + std::to_string(model.shape.vocab_size) +
                     ") does not match the prepared cache (" + std::to_string(cache.vocab.size()) + ")");
  }
  return model;
}

std::vector<std::uint64_t> seeds_at(const CliConfig& config, const std::string& key) {
  auto seeds = config.at(key).get<std::vector<std::uint64_t>>();
  if (seeds.empty()) throw ConfigError(key + " must list at least one seed");
  return seeds;
}

ExperimentData experiment_data(const CliConfig& config, const Cache& cache) {
  return ExperimentData{&cache.train, &cache.val, &cache.test, static_cast<int>(cache.vocab.size()),
                        encoder_from_config(config, cache.vocab)};
}

}  // namespace

int cmd_prepare(const CliConfig& config, std::ostream& out) {
  const fs::path corpus = config.require_string("paths.corpus");
  if (!fs::exists(corpus)) throw DataError("corpus file not found: " + corpus.string());
  const PrepareOptions options = config.prepare_options();
  const fs::path dir = config.cache_dir();

  const json options_json = {{"max_posts", options.max_posts},
                             {"max_tokens", options.max_tokens},
                             {"min_frequency", options.min_frequency},
                             {"split", {options.split.train, options.split.val, options.split.test}},
                             {"seed", options.split.seed}};
  const std::string input_hash =
      fnv1a_hex(read_file(corpus) + '\n' + options_json.dump() + '\n' + std::to_string(kCacheVersion));

  const fs::path manifest_path = dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    const json old = json::parse(in, nullptr, false);
    bool complete = true;
    for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl", "vocab.tsv"}) complete &= fs::exists(dir / f);
    if (!old.is_discarded() && complete && old.value("input_hash", "") == input_hash) {
      out << "cache up to date: " << dir.string() << '\n';
      return 0;
    }
  }

  const auto users = load_corpus(corpus);
  const PreparedData data = prepare_dataset(users, options);
  fs::create_directories(dir);
  save_split(dir / "train.jsonl", "train", data.train);
  save_split(dir / "val.jsonl", "val", data.val);
  save_split(dir / "test.jsonl", "test", data.test);
  data.vocab.save(dir / "vocab.tsv");

  const json manifest = {{"format", "mvp-manifest"},
                         {"version", kManifestVersion},
                         {"input_hash", input_hash},
                         {"corpus", corpus.filename().string()},
                         {"seed", options.split.seed},
                         {"options", options_json},
                         {"users", users.size()},
                         {"skipped", data.skipped},
                         {"splits", {{"train", data.train.size()}, {"val", data.val.size()}, {"test", data.test.size()}}},
                         {"vocab_size", data.vocab.size()}};
  write_text(manifest_path, manifest.dump(2) + "\n");
  out << "prepared " << users.size() << " users (" << data.skipped.size() << " skipped): train " << data.train.size()
      << ", val " << data.val.size() << ", test " << data.test.size() << ", vocabulary " << data.vocab.size() << '\n';
  return 0;
}

int cmd_train(const CliConfig& config, std::ostream& out) {
  const Cache cache = load_cache(config);
  const TrainConfig tc = config.train_config();
  const fs::path reports = config.report_dir();
  fs::create_directories(reports);

  const fs::path csv_path = reports / "train_epochs.csv";
  write_text(csv_path, epoch_csv_header() + "\n");
  TrainOptions options;
  options.encoder = encoder_from_config(config, cache.vocab);
  options.checkpoint_path = config.checkpoint_dir() / "best.json";
  options.on_epoch = [&](const EpochRecord& e) {
    std::ofstream csv(csv_path, std::ios::app | std::ios::binary);
    csv << epoch_csv_row(e) << '\n';
    out << "epoch " << e.epoch << ": L_det " << e.detection << ", L_ucr " << e.consistency << ", val avg F1 "
        << e.validation.average << '\n';
  };
  const TrainResult result =
      train(tc, TrainSplits{&cache.train, &cache.val, &cache.test}, static_cast<int>(cache.vocab.size()), options);

  const fs::path record_path = reports / "train_run.json";
  write_text(record_path, run_record_to_json(result.record).dump(2) + "\n");
  write_meta(record_path, "train");
  out << "selected epoch " << result.record.selected_epoch << "; checkpoint " << options.checkpoint_path->string()
      << '\n';
  if (result.record.test) out << report_to_text(*result.record.test);
  return 0;
}

int cmd_eval(const CliConfig& config, std::ostream& out) {
  const Cache cache = load_cache(config);
  const std::string split = config.at("eval.split").get<std::string>();
  const MvpModel model = load_model_for(config.checkpoint_path("eval.checkpoint"), cache);
  const EvalReport report = evaluate(model, cache.split(split));
  const fs::path reports = config.report_dir();
  json j = report_to_json(report);
  j["split"] = split;
  write_text(reports / ("eval_" + split + ".json"), j.dump(2) + "\n");
  write_text(reports / ("eval_" + split + ".txt"), report_to_text(report));
  write_meta(reports / ("eval_" + split + ".json"), "eval");
  out << report_to_text(report);
  return 0;
}

int cmd_predict(const CliConfig& config, std::ostream& out) {
  const fs::path input = config.require_string("predict.input");
  const fs::path output = config.require_string("predict.output");
  const Vocabulary vocab = Vocabulary::load(config.cache_dir() / "vocab.tsv");
  const MvpModel model = load_checkpoint(config.checkpoint_path("predict.checkpoint"));
  if (model.shape.vocab_size != static_cast<int>(vocab.size())) {
    throw ShapeError("checkpoint vocabulary does not match the prepared cache");
  }

  std::ifstream in(input);
  if (!in) throw DataError("cannot open predict input '" + input.string() + "'");
  std::ostringstream lines;
  std::string line;
  int row = 0;
  int predicted = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("posts") || !j["posts"].is_array()) {
      throw DataError("predict input row " + std::to_string(row) + " needs a posts array");
    }
    std::string id = "row-" + std::to_string(row);
    if (j.contains("id")) id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    const auto words =
        pretokenize_posts(id, j["posts"].get<std::vector<std::string>>(), model.shape.max_tokens, model.shape.max_posts);
    if (!words) {
      lines << json{{"id", id}, {"skipped", true}}.dump() << '\n';
      continue;
    }
    UserSample sample = index_user(*words, vocab);
    const TraitDistributions dist = forward_user(model, sample, nullptr);
    json probs = json::object();
    TraitLabels labels;
    for (int t = 0; t < dist.traits(); ++t) {
      probs[std::string(kTraitNames[t])] = dist.probs[t][1];
      labels.push_back(dist.predicted(t));
    }
    lines << json{{"id", id}, {"p_first_pole", probs}, {"type", decode_labels(labels)}}.dump() << '\n';
    ++predicted;
  }
  write_text(output, lines.str());
  out << "predicted " << predicted << " users -> " << output.string() << '\n';
  return 0;
}

int cmd_ablate(const CliConfig& config, std::ostream& out) {
  const Cache cache = load_cache(config);
  const TrainConfig tc = config.train_config();
  const auto seeds = seeds_at(config, "ablate.seeds");
  const int workers = config.at("ablate.workers");
  const ExperimentData data = experiment_data(config, cache);
  std::vector<AblationRow> rows;
  for (Variant v : {Variant::kFull, Variant::kNoMoe, Variant::kNoUcr}) rows.push_back(run_ablation(tc, v, seeds, data, workers));

  const fs::path reports = config.report_dir();
  write_text(reports / "ablation.json", ablation_to_json(rows).dump(2) + "\n");
  write_text(reports / "ablation.txt", ablation_to_text(rows));
  write_meta(reports / "ablation.json", "ablate");
  out << ablation_to_text(rows);
  return 0;
}

int cmd_sweep(const CliConfig& config, std::ostream& out) {
  const Cache cache = load_cache(config);
  const TrainConfig tc = config.train_config();
  const SweepAxis axis = parse_axis(config.at("sweep.axis").get<std::string>());
  const auto values = config.at("sweep.values").get<std::vector<double>>();
  const auto seeds = seeds_at(config, "sweep.seeds");
  const int workers = config.at("sweep.workers");
  const auto rows = run_sweep(tc, axis, values, seeds, experiment_data(config, cache), workers);

  const fs::path reports = config.report_dir();
  const fs::path csv = reports / ("sweep_" + axis_name(axis) + ".csv");
  write_text(csv, sweep_to_csv(rows));
  write_text(reports / ("sweep_" + axis_name(axis) + "_means.csv"), sweep_means_to_csv(rows));
  write_meta(csv, "sweep");
  out << sweep_means_to_csv(rows);
  return 0;
}

int cmd_inspect_gates(const CliConfig& config, std::ostream& out) {
  const Cache cache = load_cache(config);
  const std::string split = config.at("inspect.split").get<std::string>();
  const MvpModel model = load_model_for(config.checkpoint_path("inspect.checkpoint"), cache);
  const GateUtilization g = inspect_gates(model, cache.split(split), config.at("inspect.top").get<int>());
  json j = g.to_json();
  j["split"] = split;
  const fs::path path = config.report_dir() / ("gates_" + split + ".json");
  write_text(path, j.dump(2) + "\n");
  write_meta(path, "inspect-gates");
  out << "expert mean weights:";
  for (Eigen::Index k = 0; k < g.mean.size(); ++k) out << ' ' << g.mean(k);
  out << "\nreport: " << path.string() << '\n';
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-view mixture-of-experts personality detection"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", overrides, "Override a dotted key, e.g. --set train.lambda=0.5")->take_all();
  app.add_option("--seed", seed, "Master seed (same as --set seed=N)");

  using Handler = int (*)(const CliConfig&, std::ostream&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"prepare", "Tokenize, scrub and split a corpus into the cache", cmd_prepare},
      {"train", "Train a model and keep the best checkpoint", cmd_train},
      {"eval", "Evaluate a checkpoint on a split", cmd_eval},
      {"predict", "Predict trait probabilities for JSON-lines posts", cmd_predict},
      {"ablate", "Compare full, no_moe and no_ucr over several seeds", cmd_ablate},
      {"sweep", "Sweep K or lambda over several seeds", cmd_sweep},
      {"inspect-gates", "Report expert utilization of a checkpoint", cmd_inspect_gates},
  };
  for (const auto& [name, help, handler] : commands) app.add_subcommand(name, help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "mvp: error: usage: " << e.what() << '\n';
    return 2;
  }

  try {
    CliConfig config;
    if (!config_path.empty()) config.merge_file(config_path);
    for (const auto& o : overrides) config.set(o);
    if (seed) config.set("seed=" + std::to_string(*seed));
    for (const auto& [name, help, handler] : commands) {
      if (app.got_subcommand(name)) return handler(config, out);
    }
  } catch (const ConfigError& e) {
    err << "mvp: error: config: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    err << "mvp: error: data: " << e.what() << '\n';
  } catch (const ShapeError& e) {
    err << "mvp: error: shape: " << e.what() << '\n';
  } catch (const NumericError& e) {
    err << "mvp: error: numeric: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "mvp: error: internal: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace mvp
