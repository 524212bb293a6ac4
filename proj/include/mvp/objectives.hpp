#pragma once

#include <array>
#include <vector>

#include "mvp/mbti.hpp"
#include "mvp/rng.hpp"
#include "mvp/tensor.hpp"

namespace mvp {

/// Two logits per trait: column 2t scores class 0, column 2t+1 class 1.
struct TraitHeadParams {
  Mat weight;  // d_v x 2T
  Vec bias;    // 2T

  int traits() const { return static_cast<int>(bias.size() / 2); }
  static TraitHeadParams initialize(Eigen::Index d_v, int traits, Rng& rng);
  static TraitHeadParams zeros(Eigen::Index d_v, int traits);
};

/// Per trait, (p(class 0), p(class 1)).
struct TraitDistributions {
  std::vector<std::array<double, 2>> probs;

  int traits() const { return static_cast<int>(probs.size()); }
  /// argmax of the pair; an exact tie predicts class 0.
  std::uint8_t predicted(int t) const { return probs[t][1] > probs[t][0] ? 1 : 0; }
  bool operator==(const TraitDistributions&) const = default;
};

/// Gradient of a scalar with respect to each probability entry.
using ProbGrad = std::vector<std::array<double, 2>>;

inline constexpr double kProbClamp = 1e-12;

/// Per-trait two-way softmax of U . W_u + b_u.
TraitDistributions trait_head(const Vec& user, const TraitHeadParams& params);

/// Accumulates head gradients and returns dL/dU.
Vec trait_head_backward(const Vec& user, const TraitHeadParams& params, const TraitDistributions& dist,
                        const ProbGrad& d_probs, TraitHeadParams& grad);

/// Binary cross-entropy summed over traits, probabilities clamped to
/// [1e-12, 1 - 1e-12] before the log.
double detection_loss(const TraitDistributions& dist, const TraitLabels& labels, ProbGrad* grad = nullptr);

/// Bidirectional KL, (KL(a||b) + KL(b||a)) / 2, summed over traits.
double consistency_loss(const TraitDistributions& a, const TraitDistributions& b, ProbGrad* grad_a = nullptr,
                        ProbGrad* grad_b = nullptr);

struct LossBundle {
  double detection = 0.0;
  double consistency = 0.0;
  double total = 0.0;
  double lambda = 0.0;
};

/// total = detection + lambda * consistency. Throws on negative lambda.
LossBundle total_loss(double detection, double consistency, double lambda);

/// Batch reductions: mean over users of the per-user values.
double detection_loss(const std::vector<TraitDistributions>& dists, const std::vector<TraitLabels>& labels);
double consistency_loss(const std::vector<TraitDistributions>& a, const std::vector<TraitDistributions>& b);

}  // namespace mvp
