#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mvp/attention.hpp"
#include "mvp/dataset.hpp"
#include "mvp/encoder.hpp"
#include "mvp/moe.hpp"
#include "mvp/objectives.hpp"

namespace mvp {

struct ModelShape {
  int vocab_size = 0;
  int d_w = 32;
  int d_v = 32;
  int experts = 6;
  int traits = kTraitCount;
  int max_posts = 50;
  int max_tokens = 70;

  bool operator==(const ModelShape&) const = default;
};

/// Every parameter of the network: encoder table, word attention, the K
/// whitening experts, the router and the trait head.
struct MvpModel {
  ModelShape shape;
  EmbeddingEncoder encoder;
  AttentionParams attention;
  std::vector<ExpertParams> experts;
  GateParams gate;
  TraitHeadParams head;

  /// Fresh parameters. Draw order is fixed (encoder, attention, experts,
  /// gate, head) so a seed maps to one model.
  static MvpModel initialize(const ModelShape& shape, Rng& rng);

  /// Same shapes, all zero; used as a gradient accumulator.
  MvpModel zeros_like() const;

  /// Named views of all tensors in a fixed order. Frozen encoder tables are
  /// listed with trainable = false.
  std::vector<TensorRef> tensors();

  void check_shapes() const;
};

/// Random draws of one training forward pass. Empty masks mean "no dropout";
/// an absent epsilon means a noise-free gate.
struct PassNoise {
  Mat post_mask;  // max_posts x d_w, entries 0 or 1/(1-rate)
  Vec user_mask;  // d_v, entries 0 or 1/(1-rate)
  std::optional<Vec> gate_epsilon;
};

/// Draws dropout masks from `dropout_rng` (nothing when rate is 0) and gate
/// noise from `noise_rng`.
PassNoise sample_pass_noise(const ModelShape& shape, double dropout_rate, Rng& dropout_rng, Rng& noise_rng);

struct ForwardTrace {
  std::vector<PostTrace> posts;
  UserPostMatrix post_matrix;  // after dropout
  MoeTrace moe;
  Vec user;  // U after dropout, the head input
  TraitDistributions dist;
};

/// One forward pass. A null `noise` is evaluation mode.
TraitDistributions forward_user(const MvpModel& model, const UserSample& sample, const PassNoise* noise,
                                ForwardTrace* trace = nullptr);

/// Backpropagates d_probs through a recorded pass into `grad`.
void backward_user(const MvpModel& model, const UserSample& sample, const PassNoise* noise,
                   const ForwardTrace& trace, const ProbGrad& d_probs, MvpModel& grad);

/// Gate weights in evaluation mode.
GateWeights gate_weights(const MvpModel& model, const UserSample& sample);

/// The two dropout-perturbed passes used for consistency training. The
/// passes share parameters and draw from separate streams.
struct DualForward {
  PassNoise noise_first;
  PassNoise noise_second;
  TraitDistributions first;
  TraitDistributions second;
};

/// With gate_noise false the router runs noise-free in both passes.
DualForward dual_forward(const UserSample& sample, const MvpModel& model, double dropout_rate, Rng& dropout_first,
                         Rng& dropout_second, Rng& noise_first, Rng& noise_second, bool gate_noise = true);

struct UserLoss {
  double detection = 0.0;    // mean of the two passes
  double consistency = 0.0;  // bidirectional KL between the passes
};

/// Loss of one user under fixed draws. When `grad` is given, the gradient of
/// scale * (detection + lambda * consistency) is accumulated into it; the
/// consistency branch is skipped entirely when lambda is 0.
UserLoss user_loss(const MvpModel& model, const UserSample& sample, const PassNoise& first, const PassNoise& second,
                   double lambda, MvpModel* grad = nullptr, double scale = 1.0);

}  // namespace mvp
