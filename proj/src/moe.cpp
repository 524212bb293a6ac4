#include "mvp/moe.hpp"

#include <algorithm>
#include <cmath>

#include "mvp/error.hpp"

namespace mvp {

ExpertParams ExpertParams::initialize(Eigen::Index d_w, Eigen::Index d_v, Rng& rng) {
  ExpertParams e = zeros(d_w, d_v);
  fill_uniform(e.projection, 1.0 / std::sqrt(static_cast<double>(d_w)), rng);
  return e;
}

ExpertParams ExpertParams::zeros(Eigen::Index d_w, Eigen::Index d_v) {
  return {Vec::Zero(d_w), Mat::Zero(d_w, d_v)};
}

GateParams GateParams::initialize(Eigen::Index d_w, Eigen::Index experts, Rng& rng) {
  GateParams g = zeros(d_w, experts);
  fill_uniform(g.clean, 0.01, rng);
  fill_uniform(g.noise, 0.01, rng);
  return g;
}

GateParams GateParams::zeros(Eigen::Index d_w, Eigen::Index experts) {
  return {Mat::Zero(d_w, experts), Mat::Zero(d_w, experts)};
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vec masked_mean(const UserPostMatrix& h) {
  if (h.n_real < 1) throw ShapeError("post matrix has no real rows");
  const Eigen::Index width = h.rows.cols();
  Vec mean(width);
  std::vector<double> column;
  column.reserve(h.n_real);
  for (Eigen::Index c = 0; c < width; ++c) {
    column.clear();
    for (Eigen::Index r = 0; r < h.rows.rows(); ++r) {
      if (h.post_mask[r]) column.push_back(h.rows(r, c));
    }
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double v : column) sum += v;
    mean(c) = sum / static_cast<double>(column.size());
  }
  return mean;
}

Vec parameter_whitening(const Vec& h, const ExpertParams& expert) {
  if (h.size() != expert.center.size() || h.size() != expert.projection.rows()) {
    throw ShapeError("whitening expects width " + std::to_string(expert.center.size()) + ", got " +
                     std::to_string(h.size()));
  }
  return expert.projection.transpose() * (h - expert.center);
}

Vec expert_forward(const UserPostMatrix& h, const ExpertParams& expert) {
  return parameter_whitening(masked_mean(h), expert);
}

Vec sample_gate_noise(Eigen::Index experts, Rng& rng) {
  Vec eps(experts);
  for (Eigen::Index k = 0; k < experts; ++k) eps(k) = rng.normal();
  return eps;
}

namespace {

Vec softmax(const Vec& logits) {
  const double m = logits.maxCoeff();
  Vec p = (logits.array() - m).exp().matrix();
  return p / p.sum();
}

GateWeights gate_from_mean(const Vec& mean, const GateParams& params, const Vec* epsilon, GateTrace* trace) {
  if (mean.size() != params.clean.rows() || params.noise.rows() != params.clean.rows() ||
      params.noise.cols() != params.clean.cols()) {
    throw ShapeError("gate parameters do not match post width " + std::to_string(mean.size()));
  }
  Vec logits = params.clean.transpose() * mean;
  Vec noise_logits;
  if (epsilon) {
    if (epsilon->size() != logits.size()) throw ShapeError("gate noise has the wrong length");
    noise_logits = params.noise.transpose() * mean;
    for (Eigen::Index k = 0; k < logits.size(); ++k) logits(k) += softplus(noise_logits(k)) * (*epsilon)(k);
  }
  GateWeights out{softmax(logits)};
  if (trace) {
    trace->mean = mean;
    trace->noise_logits = std::move(noise_logits);
    trace->epsilon = epsilon ? *epsilon : Vec();
    trace->weights = out.g;
  }
  return out;
}

}  // namespace

GateWeights gate(const UserPostMatrix& h, const GateParams& params, const Vec* epsilon, GateTrace* trace) {
  return gate_from_mean(masked_mean(h), params, epsilon, trace);
}

GateWeights gate(const UserPostMatrix& h, const GateParams& params, Rng& noise_rng, bool training) {
  if (!training) return gate(h, params, nullptr);
  const Vec eps = sample_gate_noise(params.experts(), noise_rng);
  return gate(h, params, &eps);
}

Vec moe_forward(const UserPostMatrix& h, const std::vector<ExpertParams>& experts, const GateParams& gate_params,
                const Vec* epsilon, MoeTrace* trace) {
  if (experts.empty()) throw ShapeError("mixture needs at least one expert");
  if (static_cast<Eigen::Index>(experts.size()) != gate_params.experts()) {
    throw ShapeError("gate routes " + std::to_string(gate_params.experts()) + " experts but " +
                     std::to_string(experts.size()) + " were given");
  }
  const Vec mean = masked_mean(h);
  GateTrace gt;
  const GateWeights g = gate_from_mean(mean, gate_params, epsilon, trace ? &gt : nullptr);

  const Eigen::Index d_v = experts.front().projection.cols();
  Mat outputs(d_v, static_cast<Eigen::Index>(experts.size()));
  for (std::size_t k = 0; k < experts.size(); ++k) outputs.col(k) = parameter_whitening(mean, experts[k]);
  Vec user = Vec::Zero(d_v);
  for (Eigen::Index k = 0; k < outputs.cols(); ++k) user += g.g(k) * outputs.col(k);

  if (trace) {
    trace->gate = std::move(gt);
    trace->expert_outputs = std::move(outputs);
  }
  return user;
}

Vec moe_forward(const UserPostMatrix& h, const std::vector<ExpertParams>& experts, const GateParams& gate_params,
                Rng& noise_rng, bool training) {
  if (!training) return moe_forward(h, experts, gate_params, nullptr);
  const Vec eps = sample_gate_noise(gate_params.experts(), noise_rng);
  return moe_forward(h, experts, gate_params, &eps);
}

Vec moe_backward(const std::vector<ExpertParams>& experts, const GateParams& gate_params, const MoeTrace& trace,
                 const Vec& d_user, std::vector<ExpertParams>& d_experts, GateParams& d_gate) {
  const Vec& g = trace.gate.weights;
  const Vec& mean = trace.gate.mean;
  Vec d_mean = Vec::Zero(mean.size());

  // U = sum_k g_k u_k
  const Vec d_g = trace.expert_outputs.transpose() * d_user;
  for (std::size_t k = 0; k < experts.size(); ++k) {
    const Vec d_u = g(k) * d_user;
    // u_k = W1_k^T (h - b_k)
    d_experts[k].projection.noalias() += (mean - experts[k].center) * d_u.transpose();
    const Vec d_centered = experts[k].projection * d_u;
    d_experts[k].center -= d_centered;
    d_mean += d_centered;
  }

  const Vec d_logits = g.cwiseProduct((d_g.array() - g.dot(d_g)).matrix());
  d_gate.clean.noalias() += mean * d_logits.transpose();
  d_mean.noalias() += gate_params.clean * d_logits;
  if (trace.gate.epsilon.size() > 0) {
    Vec d_noise_logits(d_logits.size());
    for (Eigen::Index k = 0; k < d_logits.size(); ++k) {
      d_noise_logits(k) = d_logits(k) * trace.gate.epsilon(k) * sigmoid(trace.gate.noise_logits(k));
    }
    d_gate.noise.noalias() += mean * d_noise_logits.transpose();
    d_mean.noalias() += gate_params.noise * d_noise_logits;
  }
  return d_mean;
}

}  // namespace mvp
