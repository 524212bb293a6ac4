#include "mvp/objectives.hpp"

#include <algorithm>
#include <cmath>

#include "mvp/error.hpp"

namespace mvp {
namespace {

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

// d clamp(p) / dp
double clamp_slope(double p) { return (p > kProbClamp && p < 1.0 - kProbClamp) ? 1.0 : 0.0; }

void check_same_traits(const TraitDistributions& a, const TraitDistributions& b) {
  if (a.traits() != b.traits()) throw ShapeError("trait distributions differ in trait count");
}

}  // namespace

TraitHeadParams TraitHeadParams::initialize(Eigen::Index d_v, int traits, Rng& rng) {
  TraitHeadParams p = zeros(d_v, traits);
  fill_uniform(p.weight, 1.0 / std::sqrt(static_cast<double>(d_v)), rng);
  return p;
}

TraitHeadParams TraitHeadParams::zeros(Eigen::Index d_v, int traits) {
  return {Mat::Zero(d_v, 2 * traits), Vec::Zero(2 * traits)};
}

TraitDistributions trait_head(const Vec& user, const TraitHeadParams& params) {
  if (user.size() != params.weight.rows()) {
    throw ShapeError("trait head expects width " + std::to_string(params.weight.rows()) + ", got " +
                     std::to_string(user.size()));
  }
  const Vec logits = params.weight.transpose() * user + params.bias;
  TraitDistributions dist;
  dist.probs.resize(params.traits());
  for (int t = 0; t < params.traits(); ++t) {
    const double z0 = logits(2 * t);
    const double z1 = logits(2 * t + 1);
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m);
    const double e1 = std::exp(z1 - m);
    dist.probs[t] = {e0 / (e0 + e1), e1 / (e0 + e1)};
  }
  return dist;
}

Vec trait_head_backward(const Vec& user, const TraitHeadParams& params, const TraitDistributions& dist,
                        const ProbGrad& d_probs, TraitHeadParams& grad) {
  Vec d_logits(2 * dist.traits());
  for (int t = 0; t < dist.traits(); ++t) {
    const auto& p = dist.probs[t];
    const auto& d = d_probs[t];
    const double inner = p[0] * d[0] + p[1] * d[1];
    d_logits(2 * t) = p[0] * (d[0] - inner);
    d_logits(2 * t + 1) = p[1] * (d[1] - inner);
  }
  grad.weight.noalias() += user * d_logits.transpose();
  grad.bias += d_logits;
  return params.weight * d_logits;
}

double detection_loss(const TraitDistributions& dist, const TraitLabels& labels, ProbGrad* grad) {
  if (static_cast<int>(labels.size()) != dist.traits()) throw ShapeError("label count does not match traits");
  if (grad) grad->assign(dist.traits(), {0.0, 0.0});
  double loss = 0.0;
  for (int t = 0; t < dist.traits(); ++t) {
    const int c = labels[t] ? 1 : 0;
    const double p = dist.probs[t][c];
    loss -= std::log(clamp_prob(p));
    if (grad) (*grad)[t][c] = -clamp_slope(p) / clamp_prob(p);
  }
  return loss;
}

double consistency_loss(const TraitDistributions& a, const TraitDistributions& b, ProbGrad* grad_a,
                        ProbGrad* grad_b) {
  check_same_traits(a, b);
  if (grad_a) grad_a->assign(a.traits(), {0.0, 0.0});
  if (grad_b) grad_b->assign(a.traits(), {0.0, 0.0});
  double loss = 0.0;
  for (int t = 0; t < a.traits(); ++t) {
    for (int c = 0; c < 2; ++c) {
      const double pa = clamp_prob(a.probs[t][c]);
      const double pb = clamp_prob(b.probs[t][c]);
      const double log_ratio = std::log(pa) - std::log(pb);
      // KL(a||b) + KL(b||a) = sum_c (pa - pb)(log pa - log pb)
      loss += 0.5 * (pa - pb) * log_ratio;
      if (grad_a) (*grad_a)[t][c] = 0.5 * clamp_slope(a.probs[t][c]) * (log_ratio + (pa - pb) / pa);
      if (grad_b) (*grad_b)[t][c] = 0.5 * clamp_slope(b.probs[t][c]) * (-log_ratio + (pb - pa) / pb);
    }
  }
  // Each summand is a product of same-signed factors, so only rounding can
  // push the sum below zero.
  return std::max(loss, 0.0);
}

LossBundle total_loss(double detection, double consistency, double lambda) {
  if (!(lambda >= 0.0)) throw NumericError("lambda must be non-negative");
  return {detection, consistency, detection + lambda * consistency, lambda};
}

double detection_loss(const std::vector<TraitDistributions>& dists, const std::vector<TraitLabels>& labels) {
  if (dists.size() != labels.size() || dists.empty()) throw ShapeError("batch sizes differ or are empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < dists.size(); ++i) sum += detection_loss(dists[i], labels[i]);
  return sum / static_cast<double>(dists.size());
}

double consistency_loss(const std::vector<TraitDistributions>& a, const std::vector<TraitDistributions>& b) {
  if (a.size() != b.size() || a.empty()) throw ShapeError("batch sizes differ or are empty");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += consistency_loss(a[i], b[i]);
  return sum / static_cast<double>(a.size());
}

}  // namespace mvp
