#include "alviz/tree_model.hpp"

#include "alviz/errors.hpp"
#include "alviz/rng.hpp"

#include <cmath>
#include <numeric>

namespace alviz {
namespace {

constexpr double kDegenerateWidth = 1e-9;

bool has_two_distinct(const RowMatrix& points, std::span<const Index> members) {
  if (members.size() < 2) return false;
  const auto first = points.row(members[0]);
  for (std::size_t i = 1; i < members.size(); ++i) {
    if (points.row(members[i]) != first) return true;
  }
  return false;
}

struct Builder {
  const RowMatrix& points;
  const PartitionParams& params;
  Rng rng;
  std::vector<TreeNode>& nodes;

  NodeId grow(NodeId parent, int depth, double time, Eigen::VectorXd lo, Eigen::VectorXd hi,
              std::vector<Index> members) {
    const auto id = static_cast<NodeId>(nodes.size());
    {
      TreeNode node;
      node.parent = parent;
      node.depth = depth;
      node.lo = std::move(lo);
      node.hi = std::move(hi);
      nodes.push_back(std::move(node));
    }
    if (depth >= params.max_depth || !has_two_distinct(points, members)) return id;

    const Eigen::VectorXd extent = nodes[id].hi - nodes[id].lo;
    const double rate = extent.sum();
    const double split_time = time + rng.exponential(rate);
    if (split_time > params.lifetime) return id;

    // Dimension with probability proportional to side length.
    const double pick = rng.uniform01() * rate;
    int dim = 0;
    double acc = extent(0);
    while (dim + 1 < extent.size() && pick >= acc) {
      ++dim;
      acc += extent(dim);
    }

    const double lo_d = nodes[id].lo(dim);
    const double hi_d = nodes[id].hi(dim);
    double loc = lo_d + rng.uniform01() * (hi_d - lo_d);
    while (!(loc > lo_d && loc < hi_d)) loc = lo_d + rng.uniform01() * (hi_d - lo_d);

    std::vector<Index> left_members, right_members;
    for (const Index m : members) (points(m, dim) <= loc ? left_members : right_members).push_back(m);
    members.clear();
    members.shrink_to_fit();

    Eigen::VectorXd left_hi = nodes[id].hi;
    left_hi(dim) = loc;
    Eigen::VectorXd right_lo = nodes[id].lo;
    right_lo(dim) = loc;
    Eigen::VectorXd left_lo = nodes[id].lo;
    Eigen::VectorXd right_hi = nodes[id].hi;

    nodes[id].split_dim = dim;
    nodes[id].split_loc = loc;
    const NodeId left = grow(id, depth + 1, split_time, std::move(left_lo), std::move(left_hi),
                             std::move(left_members));
    const NodeId right = grow(id, depth + 1, split_time, std::move(right_lo), std::move(right_hi),
                              std::move(right_members));
    nodes[id].left = left;
    nodes[id].right = right;
    return id;
  }
};

}  // namespace

NodeId TreePartition::leaf_of(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  NodeId id = root();
  while (!node(id).is_leaf()) {
    const auto& n = node(id);
    id = x(n.split_dim) <= n.split_loc ? n.left : n.right;
  }
  return id;
}

std::vector<NodeId> TreePartition::leaves() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_leaf()) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

bool TreePartition::operator==(const TreePartition& other) const {
  if (nodes_.size() != other.nodes_.size()) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& a = nodes_[i];
    const auto& b = other.nodes_[i];
    if (a.split_dim != b.split_dim || a.split_loc != b.split_loc || a.left != b.left ||
        a.right != b.right || a.parent != b.parent || a.lo != b.lo || a.hi != b.hi) {
      return false;
    }
  }
  return true;
}

TreePartition build_partition(const RowMatrix& pool_features, const PartitionParams& params) {
  if (pool_features.rows() == 0 || pool_features.cols() == 0) {
    throw ConfigError("cannot build a partition over an empty pool");
  }
  if (!(params.lifetime > 0.0)) throw ConfigError("lifetime must be > 0");
  if (params.max_depth < 0) throw ConfigError("max_depth must be >= 0");

  Eigen::VectorXd lo = pool_features.colwise().minCoeff().transpose();
  Eigen::VectorXd hi = pool_features.colwise().maxCoeff().transpose();
  for (Index c = 0; c < lo.size(); ++c) {
    if (!(hi(c) > lo(c))) {
      lo(c) -= kDegenerateWidth;
      hi(c) += kDegenerateWidth;
    }
  }
  std::vector<Index> members(static_cast<std::size_t>(pool_features.rows()));
  std::iota(members.begin(), members.end(), Index{0});

  TreePartition partition;
  partition.params_ = params;
  Builder builder{pool_features, params, Rng(params.seed), partition.nodes_};
  builder.grow(kNoNode, 0, 0.0, std::move(lo), std::move(hi), std::move(members));
  return partition;
}

LeafStats::LeafStats(const TreePartition& partition, const RowMatrix& pool_features)
    : nodes_(partition.nodes().size()), pool_mass_(partition.nodes().size(), 0.0) {
  const auto n = pool_features.rows();
  if (n == 0) return;
  std::vector<Index> per_node(partition.nodes().size(), 0);
  for (Index i = 0; i < n; ++i) {
    for (NodeId id = partition.leaf_of(pool_features.row(i)); id != kNoNode; id = partition.node(id).parent) {
      ++per_node[static_cast<std::size_t>(id)];
    }
  }
  for (std::size_t i = 0; i < per_node.size(); ++i) {
    pool_mass_[i] = static_cast<double>(per_node[i]) / static_cast<double>(n);
  }
}

void LeafStats::add(const TreePartition& partition, const Eigen::Ref<const Eigen::RowVectorXd>& x, double y) {
  for (NodeId id = partition.leaf_of(x); id != kNoNode; id = partition.node(id).parent) {
    auto& s = nodes_[static_cast<std::size_t>(id)];
    ++s.count;
    const double delta = y - s.mean;
    s.mean += delta / static_cast<double>(s.count);
    s.sum_sq_dev += delta * (y - s.mean);
  }
}

double LeafStats::fallback_std() const {
  if (nodes_.empty() || nodes_.front().count < 2) return 1.0;
  return std::sqrt(nodes_.front().variance());
}

LeafStats update_stats(LeafStats stats, const TreePartition& partition, const RowMatrix& batch_features,
                       std::span<const double> batch_labels) {
  if (static_cast<std::size_t>(batch_features.rows()) != batch_labels.size()) {
    throw ConfigError("batch features/labels length mismatch");
  }
  for (Index i = 0; i < batch_features.rows(); ++i) {
    stats.add(partition, batch_features.row(i), batch_labels[static_cast<std::size_t>(i)]);
  }
  return stats;
}

double predict(const TreePartition& partition, const LeafStats& stats,
               const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  for (NodeId id = partition.leaf_of(x); id != kNoNode; id = partition.node(id).parent) {
    if (stats.at(id).count >= 1) return stats.at(id).mean;
  }
  return 0.0;
}

Eigen::VectorXd predict_rows(const TreePartition& partition, const LeafStats& stats, const RowMatrix& points) {
  Eigen::VectorXd out(points.rows());
  for (Index i = 0; i < points.rows(); ++i) out(i) = predict(partition, stats, points.row(i));
  return out;
}

double leaf_std(const LeafStats& stats, NodeId leaf) {
  const auto& s = stats.at(leaf);
  return s.count < 2 ? stats.fallback_std() : std::sqrt(s.variance());
}

std::vector<LeafRow> leaf_summary(const TreePartition& partition, const LeafStats& stats) {
  std::vector<LeafRow> rows;
  for (const NodeId leaf : partition.leaves()) {
    const auto& s = stats.at(leaf);
    rows.push_back({leaf, s.count, s.mean, leaf_std(stats, leaf), stats.pool_mass(leaf)});
  }
  return rows;
}

}  // namespace alviz
