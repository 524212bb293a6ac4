#pragma once

#include <optional>
#include <vector>

#include "mvp/attention.hpp"
#include "mvp/rng.hpp"
#include "mvp/tensor.hpp"

namespace mvp {

/// One parameter-whitening expert: PW(h) = (h - center) . projection, with
/// center in R^{d_w} and projection in R^{d_w x d_v}.
struct ExpertParams {
  Vec center;
  Mat projection;

  static ExpertParams initialize(Eigen::Index d_w, Eigen::Index d_v, Rng& rng);
  static ExpertParams zeros(Eigen::Index d_w, Eigen::Index d_v);
};

/// Router parameters: clean logits h . W2 and noise-scale logits h . W3,
/// both d_w x K.
struct GateParams {
  Mat clean;
  Mat noise;

  Eigen::Index experts() const { return clean.cols(); }
  static GateParams initialize(Eigen::Index d_w, Eigen::Index experts, Rng& rng);
  static GateParams zeros(Eigen::Index d_w, Eigen::Index experts);
};

struct GateWeights {
  Vec g;
};

double softplus(double x);
double sigmoid(double x);

/// Mean over the real rows of H. Each column is summed in ascending value
/// order, so the result does not depend on row order at all.
Vec masked_mean(const UserPostMatrix& h);

Vec parameter_whitening(const Vec& h, const ExpertParams& expert);

/// u_k = mean of PW_k over the real posts, evaluated as PW_k(mean) since
/// PW is affine.
Vec expert_forward(const UserPostMatrix& h, const ExpertParams& expert);

/// Standard-normal draws for the gate noise.
Vec sample_gate_noise(Eigen::Index experts, Rng& rng);

struct GateTrace {
  Vec mean;
  Vec noise_logits;  // h . W3 before softplus
  Vec epsilon;       // empty when no noise was applied
  Vec weights;
};

/// softmax(h . W2 + softplus(h . W3) * epsilon). A null epsilon is the
/// evaluation path (no noise).
GateWeights gate(const UserPostMatrix& h, const GateParams& params, const Vec* epsilon,
                 GateTrace* trace = nullptr);

/// Samples epsilon from `noise_rng` when training, otherwise runs noise-free.
GateWeights gate(const UserPostMatrix& h, const GateParams& params, Rng& noise_rng, bool training);

struct MoeTrace {
  GateTrace gate;
  Mat expert_outputs;  // d_v x K, column k is u_k
};

/// U = sum_k g_k u_k, every expert evaluated.
Vec moe_forward(const UserPostMatrix& h, const std::vector<ExpertParams>& experts, const GateParams& gate_params,
                const Vec* epsilon, MoeTrace* trace = nullptr);

Vec moe_forward(const UserPostMatrix& h, const std::vector<ExpertParams>& experts, const GateParams& gate_params,
                Rng& noise_rng, bool training);

/// Backpropagates dU. Parameter gradients are accumulated; the return value
/// is the gradient with respect to the pooled mean h (every real row of H
/// receives it divided by n_real).
Vec moe_backward(const std::vector<ExpertParams>& experts, const GateParams& gate_params, const MoeTrace& trace,
                 const Vec& d_user, std::vector<ExpertParams>& d_experts, GateParams& d_gate);

}  // namespace mvp
