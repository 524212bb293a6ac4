#pragma once

#include <cstdint>
#include <vector>

#include "mvp/tensor.hpp"

namespace mvp {

struct AdamOptions {
  double lr_encoder = 2e-5;
  double lr_other = 2e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam with one learning rate per parameter group. Moment
/// buffers are created on the first step and must keep matching shapes.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  /// `params` and `grads` are parallel lists (same names and shapes).
  /// Throws NumericError naming the tensor on a non-finite gradient, before
  /// any parameter is touched.
  void step(const std::vector<TensorRef>& params, const std::vector<TensorRef>& grads);

  std::int64_t steps() const { return step_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> first_moment_;
  std::vector<std::vector<double>> second_moment_;
};

}  // namespace mvp
