#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace alviz {

template <typename Scalar>
struct SymmetricEigen {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;               // descending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;  // column j pairs with values(j)
  int sweeps = 0;
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Only the upper
// triangle is read. Deterministic: a fixed (p, q) sweep order and a stable
// sort of the eigenvalues (ties keep their diagonal position).
template <typename Derived>
SymmetricEigen<typename Derived::Scalar> jacobi_eigen(const Eigen::MatrixBase<Derived>& symmetric,
                                                      int max_sweeps = 100) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = symmetric.rows();

  Matrix a = symmetric.template selfadjointView<Eigen::Upper>();
  Matrix v = Matrix::Identity(n, n);
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    Scalar off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += std::abs(a(p, q));
    if (off == Scalar(0)) break;

    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        const Scalar g = Scalar(100) * std::abs(apq);
        // Past the first sweeps, drop entries below the diagonal's precision.
        if (sweep > 3 && std::abs(a(p, p)) + g == std::abs(a(p, p)) &&
            std::abs(a(q, q)) + g == std::abs(a(q, q))) {
          a(p, q) = a(q, p) = Scalar(0);
          continue;
        }
        if (apq == Scalar(0)) continue;

        const Scalar theta = (a(q, q) - a(p, p)) / (Scalar(2) * apq);
        Scalar t = Scalar(1) / (std::abs(theta) + std::sqrt(theta * theta + Scalar(1)));
        if (theta < Scalar(0)) t = -t;
        const Scalar c = Scalar(1) / std::sqrt(t * t + Scalar(1));
        const Scalar s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = Scalar(0);
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SymmetricEigen<Scalar> out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out.values(j) = a(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(j)]);
    out.vectors.col(j) = v.col(order[static_cast<std::size_t>(j)]);
  }
  out.sweeps = sweep;
  return out;
}

}  // namespace alviz
