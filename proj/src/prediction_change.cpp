#include "alviz/prediction_change.hpp"

#include "alviz/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace alviz {
namespace {

const RowMatrix& snapshots(const RunArtifact& artifact, Strategy strategy, std::span<const Index> selection) {
  const auto& p = artifact.predictions[artifact.index_of(strategy)];
  for (const Index i : selection) {
    if (i < 0 || i >= artifact.n_test()) {
      throw std::out_of_range("test index " + std::to_string(i) + " outside [0, " +
                              std::to_string(artifact.n_test()) + ")");
    }
  }
  return p;
}

ChangeMatrix empty_matrix(ChangeKind kind, Strategy strategy, std::span<const Index> selection, Index q) {
  ChangeMatrix m;
  m.kind = kind;
  m.strategy = strategy;
  m.row_indices.assign(selection.begin(), selection.end());
  m.values.resize(static_cast<Index>(selection.size()), q);
  return m;
}

}  // namespace

ChangeKind parse_change_kind(std::string_view name) {
  if (name == "vs_original") return ChangeKind::vs_original;
  if (name == "vs_previous") return ChangeKind::vs_previous;
  if (name == "vs_truth") return ChangeKind::vs_truth;
  throw ConfigError("unknown change kind '" + std::string(name) + "'");
}

std::string_view to_string(ChangeKind kind) {
  switch (kind) {
    case ChangeKind::vs_original: return "vs_original";
    case ChangeKind::vs_previous: return "vs_previous";
    case ChangeKind::vs_truth: return "vs_truth";
  }
  return "?";
}

std::vector<Index> ChangeMatrix::q_axis() const {
  std::vector<Index> axis(static_cast<std::size_t>(num_batches()));
  std::iota(axis.begin(), axis.end(), Index{1});
  return axis;
}

ChangeMatrix change_vs_original(const RunArtifact& artifact, Strategy strategy, std::span<const Index> selection) {
  const auto& p = snapshots(artifact, strategy, selection);
  auto m = empty_matrix(ChangeKind::vs_original, strategy, selection, artifact.num_batches());
  for (Index r = 0; r < m.values.rows(); ++r) {
    const Index i = selection[static_cast<std::size_t>(r)];
    for (Index q = 1; q <= m.num_batches(); ++q) m.values(r, q - 1) = p(q, i) - p(0, i);
  }
  return m;
}

ChangeMatrix change_vs_previous(const RunArtifact& artifact, Strategy strategy, std::span<const Index> selection) {
  const auto& p = snapshots(artifact, strategy, selection);
  auto m = empty_matrix(ChangeKind::vs_previous, strategy, selection, artifact.num_batches());
  for (Index r = 0; r < m.values.rows(); ++r) {
    const Index i = selection[static_cast<std::size_t>(r)];
    for (Index q = 1; q <= m.num_batches(); ++q) m.values(r, q - 1) = p(q, i) - p(q - 1, i);
  }
  return m;
}

ChangeMatrix change_vs_truth(const RunArtifact& artifact, Strategy strategy, std::span<const Index> selection) {
  const auto& p = snapshots(artifact, strategy, selection);
  auto m = empty_matrix(ChangeKind::vs_truth, strategy, selection, artifact.num_batches());
  m.origin_residual.resize(m.values.rows());
  for (Index r = 0; r < m.values.rows(); ++r) {
    const Index i = selection[static_cast<std::size_t>(r)];
    const double truth = artifact.test_labels(i);
    m.origin_residual(r) = p(0, i) - truth;
    for (Index q = 1; q <= m.num_batches(); ++q) m.values(r, q - 1) = p(q, i) - truth;
  }
  return m;
}

ChangeMatrix change_matrix(const RunArtifact& artifact, Strategy strategy, ChangeKind kind,
                           std::span<const Index> selection) {
  switch (kind) {
    case ChangeKind::vs_original: return change_vs_original(artifact, strategy, selection);
    case ChangeKind::vs_previous: return change_vs_previous(artifact, strategy, selection);
    case ChangeKind::vs_truth: return change_vs_truth(artifact, strategy, selection);
  }
  throw ConfigError("unknown change kind");
}

FlagMatrix check_flags(const ChangeMatrix& matrix, double eps) {
  if (!(eps >= 0.0)) throw ConfigError("check_flags: eps must be >= 0");
  FlagMatrix flags(matrix.values.rows(), matrix.values.cols());
  if (matrix.kind == ChangeKind::vs_truth) {
    if (matrix.origin_residual.size() != matrix.values.rows()) {
      throw ConfigError("check_flags: vs_truth matrix lacks its original residuals");
    }
    for (Index r = 0; r < flags.rows(); ++r) {
      const double baseline = std::abs(matrix.origin_residual(r));
      for (Index c = 0; c < flags.cols(); ++c) flags(r, c) = std::abs(matrix.values(r, c)) < baseline - eps;
    }
  } else {
    flags = (matrix.values.array().abs() > eps);
  }
  return flags;
}

Eigen::VectorXd aggregate_improvement(const RunArtifact& artifact, Strategy strategy,
                                      std::span<const Index> selection) {
  const auto& p = snapshots(artifact, strategy, selection);
  Eigen::VectorXd curve = Eigen::VectorXd::Zero(artifact.num_batches() + 1);
  for (Index q = 0; q < curve.size(); ++q) {
    for (const Index i : selection) curve(q) += std::abs(p(q, i) - artifact.test_labels(i));
  }
  return curve;
}

}  // namespace alviz
