#include "mvp/trainer.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "mvp/checkpoint.hpp"
#include "mvp/error.hpp"

namespace mvp {

TrainConfig TrainConfig::desk_scale() {
  TrainConfig c;
  c.d_w = 32;
  c.d_v = 32;
  c.max_posts = 20;
  c.max_tokens = 15;
  // the toy embedding table is trained from scratch, not fine-tuned
  c.lr_encoder = 2e-3;
  return c;
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(lambda >= 0.0, "lambda must be >= 0");
  require(experts >= 1, "experts must be >= 1");
  require(max_posts >= 1 && max_tokens >= 1, "max_posts and max_tokens must be >= 1");
  require(d_w >= 1 && d_v >= 1, "d_w and d_v must be >= 1");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(lr_encoder >= 0.0 && lr_other >= 0.0, "learning rates must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(max_epochs >= 1, "max_epochs must be >= 1");
}

ModelShape TrainConfig::shape(int vocab_size) const {
  return ModelShape{vocab_size, d_w, d_v, experts, kTraitCount, max_posts, max_tokens};
}

nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"lambda", c.lambda},         {"experts", c.experts},       {"max_posts", c.max_posts},
          {"max_tokens", c.max_tokens}, {"d_w", c.d_w},               {"d_v", c.d_v},
          {"dropout", c.dropout},       {"lr_encoder", c.lr_encoder}, {"lr_other", c.lr_other},
          {"batch_size", c.batch_size}, {"max_epochs", c.max_epochs}, {"seed", c.seed},
          {"gate_noise", c.gate_noise}};
}

nlohmann::json run_record_to_json(const RunRecord& record) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : record.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"L_det", e.detection},
                      {"L_ucr", e.consistency},
                      {"total", e.total},
                      {"validation", report_to_json(e.validation)}});
  }
  nlohmann::json j = {{"epochs", epochs},
                      {"selected_epoch", record.selected_epoch},
                      {"seed", record.seed},
                      {"config", config_to_json(record.config)}};
  if (record.test) j["test"] = report_to_json(*record.test);
  return j;
}

std::string epoch_csv_header() { return "epoch,L_det,L_ucr,total,val_f1_EI,val_f1_SN,val_f1_TF,val_f1_JP,val_f1_avg"; }

std::string epoch_csv_row(const EpochRecord& e) {
  std::ostringstream out;
  out.precision(17);
  out << e.epoch << ',' << e.detection << ',' << e.consistency << ',' << e.total;
  for (double f : e.validation.trait_f1) out << ',' << f;
  out << ',' << e.validation.average;
  return out.str();
}

TrainResult train(const TrainConfig& config, const TrainSplits& splits, int vocab_size, const TrainOptions& options) {
  config.validate();
  if (!splits.train || splits.train->empty()) throw DataError("training split is empty");
  if (!splits.val || splits.val->empty()) throw DataError("validation split is empty");

  RngStreams streams = RngStreams::from_seed(config.seed);
  MvpModel model = MvpModel::initialize(config.shape(vocab_size), streams.init);
  if (options.encoder) {
    if (options.encoder->width() != config.d_w || options.encoder->vocab_size() != vocab_size) {
      throw ShapeError("encoder table does not match d_w/vocabulary");
    }
    model.encoder = *options.encoder;
  }
  for (const auto* split : {splits.train, splits.val}) {
    for (const auto& u : *split) validate_sample(u, config.max_posts, config.max_tokens, vocab_size);
  }

  Adam adam(AdamOptions{config.lr_encoder, config.lr_other});
  const Dataset& data = *splits.train;
  std::vector<std::size_t> order(data.size());

  TrainResult result{RunRecord{}, model};
  result.record.seed = config.seed;
  result.record.config = config;
  double best_score = -1.0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), streams.shuffle.engine());

    EpochRecord rec;
    rec.epoch = epoch;
    int batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const double scale = 1.0 / static_cast<double>(end - start);
      MvpModel grad = model.zeros_like();
      double batch_det = 0.0;
      double batch_ucr = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const UserSample& user = data[order[i]];
        PassNoise first = sample_pass_noise(model.shape, config.dropout, streams.dropout_first, streams.noise_first);
        PassNoise second =
            sample_pass_noise(model.shape, config.dropout, streams.dropout_second, streams.noise_second);
        if (!config.gate_noise) {
          first.gate_epsilon.reset();
          second.gate_epsilon.reset();
        }
        const UserLoss loss = user_loss(model, user, first, second, config.lambda, &grad, scale);
        batch_det += loss.detection;
        batch_ucr += loss.consistency;
      }
      const LossBundle bundle = total_loss(batch_det * scale, batch_ucr * scale, config.lambda);
      if (!std::isfinite(bundle.total) || !std::isfinite(bundle.consistency)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                           std::to_string(batch_index));
      }
      rec.detection += batch_det;
      rec.consistency += batch_ucr;
      adam.step(model.tensors(), grad.tensors());
    }
    const double n = static_cast<double>(data.size());
    rec.detection /= n;
    rec.consistency /= n;
    rec.total = total_loss(rec.detection, rec.consistency, config.lambda).total;
    rec.validation = evaluate(model, *splits.val);

    if (rec.validation.average > best_score) {
      best_score = rec.validation.average;
      result.record.selected_epoch = epoch;
      result.best = model;
      if (options.checkpoint_path) save_checkpoint(*options.checkpoint_path, model);
    }
    result.record.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);
  }

  if (splits.test && !splits.test->empty()) result.record.test = evaluate(result.best, *splits.test);
  return result;
}

}  // namespace mvp
