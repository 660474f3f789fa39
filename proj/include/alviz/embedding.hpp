#pragma once

#include "alviz/dataset.hpp"
#include "alviz/errors.hpp"
#include "alviz/jacobi_eigen.hpp"
#include "alviz/log.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace alviz {

template <typename Scalar>
struct BasicPCModel {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> components;  // d x 2, orthonormal columns
  Vector mean;
  Vector scale;  // all ones unless standardized
  bool standardized = false;
  std::array<Scalar, 2> explained_variance_ratio{0, 0};

  Eigen::Index dims() const { return mean.size(); }
};

using PCModel = BasicPCModel<double>;

// Index of the loading that fixes a component's sign: the largest magnitude,
// where magnitudes within a relative kSignTieTolerance of the maximum count as
// tied and the first of them wins. Without the tolerance, exactly tied
// loadings (e.g. (1, -1) / sqrt(2)) would pick a sign by rounding noise.
inline constexpr double kSignTieTolerance = 1e-9;

template <typename Derived>
Eigen::Index sign_anchor(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = v.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (std::abs(v(j)) >= top * (Scalar(1) - Scalar(kSignTieTolerance))) return j;
  return 0;
}

// Top-2 principal components of the rows of `features` via cyclic Jacobi on
// the sample covariance. Each component is oriented so its sign_anchor
// loading is positive.
template <typename Derived>
BasicPCModel<typename Derived::Scalar> pca_fit(const Eigen::MatrixBase<Derived>& features, bool standardize) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (n < 2) throw ConfigError("pca_fit needs at least 2 rows");
  if (d < 2) throw ConfigError("pca_fit needs at least 2 features");

  BasicPCModel<Scalar> model;
  model.standardized = standardize;
  model.mean = features.colwise().mean().transpose();
  Matrix centered = features.rowwise() - model.mean.transpose();
  model.scale.setOnes(d);
  if (standardize) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const Scalar sd = std::sqrt(centered.col(c).squaredNorm() / static_cast<Scalar>(n - 1));
      if (!(sd > Scalar(kScaleFloor))) {
        log::warn("pca_fit: feature " + std::to_string(c) + " is constant; std floored");
        model.scale(c) = Scalar(kScaleFloor);
      } else {
        model.scale(c) = sd;
      }
    }
    centered = centered.array().rowwise() / model.scale.transpose().array();
  }
  const Matrix covariance = (centered.transpose() * centered) / static_cast<Scalar>(n - 1);
  const auto eig = jacobi_eigen(covariance);

  Scalar trace = 0;
  for (Eigen::Index j = 0; j < d; ++j) trace += std::max(eig.values(j), Scalar(0));
  for (int k = 0; k < 2; ++k) {
    auto column = eig.vectors.col(k);
    const Eigen::Index arg = sign_anchor(column);
    model.components.resize(d, 2);
    model.components.col(k) = column(arg) < Scalar(0) ? Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(-column)
                                                       : Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(column);
    model.explained_variance_ratio[static_cast<std::size_t>(k)] =
        trace > Scalar(0) ? std::clamp(std::max(eig.values(k), Scalar(0)) / trace, Scalar(0), Scalar(1)) : Scalar(0);
  }
  return model;
}

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 2, Eigen::RowMajor> project(const BasicPCModel<Scalar>& model,
                                                                   const Eigen::MatrixBase<Derived>& features) {
  if (features.cols() != model.dims()) throw ConfigError("project: feature dimension mismatch");
  const auto scaled = ((features.rowwise() - model.mean.transpose()).array().rowwise() /
                       model.scale.transpose().array())
                          .matrix();
  return scaled * model.components;
}

inline constexpr Index kDefaultNearest = 20;

struct Selection {
  std::vector<Index> indices;
  std::optional<std::array<double, 2>> anchor;
  Index k = 0;
};

struct Rect {
  double pc1_lo = 0, pc1_hi = 0, pc2_lo = 0, pc2_hi = 0;
};

// The k points closest to anchor, nearest first, ties by ascending index.
Selection nearest_k(const Coords2& coords, std::array<double, 2> anchor, Index k = kDefaultNearest);

// Points inside the closed rectangle in ascending index order; beyond `cap`,
// only the cap points nearest the rectangle's centre are kept.
Selection select_rect(const Coords2& coords, const Rect& rect, Index cap = kDefaultNearest);

}  // namespace alviz
