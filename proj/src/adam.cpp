#include "mvp/adam.hpp"

#include <cmath>

#include "mvp/error.hpp"

namespace mvp {

void Adam::step(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads) {
  if (params.size() != grads.size()) throw ShapeError("adam: parameter and gradient lists differ in length");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size()) throw ShapeError("adam: gradient shape mismatch for " + params[i].name);
    if (!params[i].trainable) continue;
    for (double g : grads[i].values()) {
      if (!std::isfinite(g)) throw NumericError("adam: non-finite gradient in " + params[i].name);
    }
  }
  if (first_moment_.empty()) {
    for (const auto& p : params) {
      first_moment_.emplace_back(p.size(), 0.0);
      second_moment_.emplace_back(p.size(), 0.0);
    }
  } else if (first_moment_.size() != params.size()) {
    throw ShapeError("adam: parameter list changed between steps");
  }

  ++step_;
  const auto& o = options_;
  const double correction1 = 1.0 - std::pow(o.beta1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(o.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    const double lr = params[i].group == ParamGroup::kEncoder ? o.lr_encoder : o.lr_other;
    auto theta = params[i].values();
    auto grad = grads[i].values();
    auto& m = first_moment_[i];
    auto& v = second_moment_[i];
    if (m.size() != theta.size()) throw ShapeError("adam: moment shape mismatch for " + params[i].name);
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * grad[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * grad[j] * grad[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      theta[j] -= lr * m_hat / (std::sqrt(v_hat) + o.epsilon);
    }
  }
}

}  // namespace mvp
