#pragma once

#include "alviz/errors.hpp"

#include <Eigen/Core>

namespace alviz {

// Mean squared error between two equal-length vectors.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar mse(const Eigen::MatrixBase<DerivedA>& predictions,
                              const Eigen::MatrixBase<DerivedB>& truths) {
  if (predictions.size() != truths.size()) throw ConfigError("mse: length mismatch");
  if (predictions.size() == 0) throw ConfigError("mse: empty input");
  return (predictions - truths).squaredNorm() / static_cast<typename DerivedA::Scalar>(predictions.size());
}

}  // namespace alviz
