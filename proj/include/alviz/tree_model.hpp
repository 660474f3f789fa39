#pragma once

#include "alviz/dataset.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace alviz {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct TreeNode {
  int split_dim = -1;  // -1 for leaves
  double split_loc = 0.0;
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  NodeId parent = kNoNode;
  int depth = 0;
  Eigen::VectorXd lo;  // cell extent
  Eigen::VectorXd hi;

  bool is_leaf() const { return split_dim < 0; }
};

struct PartitionParams {
  double lifetime = 2.0;  // Mondrian budget; +inf disables it
  int max_depth = 20;
  std::uint64_t seed = 0;
};

// Label-independent axis-aligned partition drawn from a Mondrian process
// restricted to the pool's bounding box. Nodes are stored in depth-first
// order, left subtree before right; node 0 is the root.
class TreePartition {
 public:
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  NodeId root() const { return 0; }
  Index dims() const { return nodes_.front().lo.size(); }
  const PartitionParams& params() const { return params_; }

  // x[split_dim] <= split_loc goes left. Points outside the root box follow
  // the same comparisons, which is the leaf of the clamped point.
  NodeId leaf_of(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  std::vector<NodeId> leaves() const;

  bool operator==(const TreePartition& other) const;

 private:
  friend TreePartition build_partition(const RowMatrix&, const PartitionParams&);
  std::vector<TreeNode> nodes_;
  PartitionParams params_;
};

TreePartition build_partition(const RowMatrix& pool_features, const PartitionParams& params);

struct NodeStats {
  Index count = 0;
  double mean = 0.0;
  double sum_sq_dev = 0.0;

  double variance() const { return sum_sq_dev / static_cast<double>(std::max<Index>(count - 1, 1)); }
};

// Label statistics for every node of a partition. Internal nodes aggregate
// their subtree, so the empty-leaf fallback is a walk up the parent chain.
class LeafStats {
 public:
  LeafStats() = default;
  // pool_mass comes from the pool points' leaf membership.
  LeafStats(const TreePartition& partition, const RowMatrix& pool_features);

  // Welford update along the root-to-leaf path.
  void add(const TreePartition& partition, const Eigen::Ref<const Eigen::RowVectorXd>& x, double y);

  const NodeStats& at(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  double pool_mass(NodeId id) const { return pool_mass_[static_cast<std::size_t>(id)]; }
  Index total_count() const { return nodes_.empty() ? 0 : nodes_.front().count; }

  // Std used where a leaf has fewer than two labels: global labeled std, or
  // 1.0 while fewer than two labels exist.
  double fallback_std() const;

 private:
  std::vector<NodeStats> nodes_;
  std::vector<double> pool_mass_;
};

LeafStats update_stats(LeafStats stats, const TreePartition& partition, const RowMatrix& batch_features,
                       std::span<const double> batch_labels);

// Leaf mean, else mean of the nearest ancestor whose subtree holds labels,
// else 0.0.
double predict(const TreePartition& partition, const LeafStats& stats,
               const Eigen::Ref<const Eigen::RowVectorXd>& x);
Eigen::VectorXd predict_rows(const TreePartition& partition, const LeafStats& stats, const RowMatrix& points);

struct LeafRow {
  NodeId leaf = kNoNode;
  Index count = 0;
  double mean = 0.0;
  double std = 0.0;
  double pool_mass = 0.0;
};

// One row per leaf in node order.
std::vector<LeafRow> leaf_summary(const TreePartition& partition, const LeafStats& stats);

// Leaf std under the leaf_summary rules.
double leaf_std(const LeafStats& stats, NodeId leaf);

}  // namespace alviz
