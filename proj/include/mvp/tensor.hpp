#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mvp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Mask = std::vector<std::uint8_t>;

/// Optimizer learning-rate groups.
enum class ParamGroup { kEncoder, kOther };

/// Non-owning view of one named parameter tensor. Storage is Eigen's
/// column-major layout: entry (r, c) lives at data[r + c * rows].
struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  ParamGroup group;
  bool trainable;

  Eigen::Index size() const { return rows * cols; }
  std::span<double> values() const { return {data, static_cast<std::size_t>(size())}; }
};

inline TensorRef make_ref(std::string name, Mat& m, ParamGroup group, bool trainable = true) {
  return {std::move(name), m.data(), m.rows(), m.cols(), group, trainable};
}

inline TensorRef make_ref(std::string name, Vec& v, ParamGroup group, bool trainable = true) {
  return {std::move(name), v.data(), v.rows(), 1, group, trainable};
}

/// Fills with uniform(-bound, bound) draws in storage order.
template <typename Derived, typename Rng>
void fill_uniform(Eigen::DenseBase<Derived>& x, double bound, Rng& rng) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = rng.uniform(-bound, bound);
  }
}

}  // namespace mvp
