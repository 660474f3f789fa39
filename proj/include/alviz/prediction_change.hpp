#pragma once

#include "alviz/al_engine.hpp"

#include <Eigen/Dense>

#include <span>
#include <string_view>
#include <vector>

namespace alviz {

enum class ChangeKind { vs_original, vs_previous, vs_truth };

ChangeKind parse_change_kind(std::string_view name);
std::string_view to_string(ChangeKind kind);
inline constexpr std::array<ChangeKind, 3> kAllChangeKinds{ChangeKind::vs_original, ChangeKind::vs_previous,
                                                           ChangeKind::vs_truth};

// k selected test points x Q batches of signed prediction differences.
// Column j holds batch q = j + 1.
struct ChangeMatrix {
  ChangeKind kind = ChangeKind::vs_original;
  Strategy strategy = Strategy::al;
  std::vector<Index> row_indices;
  RowMatrix values;
  // vs_truth only: residual of the original (q = 0) model per row, the
  // baseline of the improvement check.
  Eigen::VectorXd origin_residual;

  Index num_batches() const { return values.cols(); }
  std::vector<Index> q_axis() const;
};

// values(i, q-1) = P[q][sel_i] - P[0][sel_i]
ChangeMatrix change_vs_original(const RunArtifact& artifact, Strategy strategy, std::span<const Index> selection);
// values(i, q-1) = P[q][sel_i] - P[q-1][sel_i]
ChangeMatrix change_vs_previous(const RunArtifact& artifact, Strategy strategy, std::span<const Index> selection);
// values(i, q-1) = P[q][sel_i] - y[sel_i]
ChangeMatrix change_vs_truth(const RunArtifact& artifact, Strategy strategy, std::span<const Index> selection);

ChangeMatrix change_matrix(const RunArtifact& artifact, Strategy strategy, ChangeKind kind,
                           std::span<const Index> selection);

using FlagMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kChangeEps = 1e-12;

// vs_original / vs_previous: |value| > eps (the prediction moved).
// vs_truth: |P[q] - y| < |P[0] - y| - eps (closer to the truth than the
// original model was).
FlagMatrix check_flags(const ChangeMatrix& matrix, double eps = kChangeEps);

// sum_i |P[q][sel_i] - y[sel_i]| for q = 0..Q.
Eigen::VectorXd aggregate_improvement(const RunArtifact& artifact, Strategy strategy,
                                      std::span<const Index> selection);

}  // namespace alviz
