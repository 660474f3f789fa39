#include "alviz/al_engine.hpp"

#include "alviz/embedding.hpp"
#include "alviz/errors.hpp"
#include "alviz/log.hpp"
#include "alviz/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <set>

namespace alviz {
namespace {

constexpr std::uint64_t kPartitionSalt = 0x9e3779b97f4a7c15ULL;

struct StrategyRun {
  RowMatrix predictions;
  IndexMatrix queried_indices;
  RowMatrix queried_labels;
  Eigen::VectorXd mse;
};

StrategyRun run_strategy(Strategy strategy, const ExperimentConfig& config, const TreePartition& partition,
                         const RowMatrix& pool_x, const Eigen::VectorXd& pool_y,
                         const std::vector<NodeId>& pool_leaf, const RowMatrix& test_x,
                         const Eigen::VectorXd& test_y) {
  const Index q_max = config.num_batches;
  const Index b = config.batch_size;
  StrategyRun run;
  run.predictions.resize(q_max + 1, test_x.rows());
  run.queried_indices.resize(q_max, b);
  run.queried_labels.resize(q_max, b);
  run.mse.resize(q_max + 1);

  Rng rng(strategy_seed(config.seed, strategy));
  LeafStats stats(partition, pool_x);
  std::vector<Index> unlabeled(static_cast<std::size_t>(pool_x.rows()));
  std::iota(unlabeled.begin(), unlabeled.end(), Index{0});

  auto snapshot = [&](Index q) {
    run.predictions.row(q) = predict_rows(partition, stats, test_x).transpose();
    run.mse(q) = mse(run.predictions.row(q).transpose(), test_y);
  };
  snapshot(0);
  for (Index q = 1; q <= q_max; ++q) {
    std::vector<Index> batch;
    switch (strategy) {
      case Strategy::rn: batch = select_batch_rn(unlabeled, b, rng); break;
      case Strategy::uc: batch = select_batch_uc(stats, pool_leaf, unlabeled, b); break;
      case Strategy::al: batch = select_batch_al(stats, pool_leaf, unlabeled, b, rng); break;
    }
    for (Index j = 0; j < b; ++j) {
      const Index i = batch[static_cast<std::size_t>(j)];
      run.queried_indices(q - 1, j) = i;
      run.queried_labels(q - 1, j) = pool_y(i);
      stats.add(partition, pool_x.row(i), pool_y(i));
    }
    std::sort(batch.begin(), batch.end());
    std::vector<Index> rest;
    rest.reserve(unlabeled.size() - batch.size());
    std::set_difference(unlabeled.begin(), unlabeled.end(), batch.begin(), batch.end(), std::back_inserter(rest));
    unlabeled = std::move(rest);
    snapshot(q);
  }
  return run;
}

}  // namespace

std::uint64_t partition_seed(std::uint64_t seed) { return seed ^ kPartitionSalt; }

std::uint64_t strategy_seed(std::uint64_t seed, Strategy strategy) {
  return seed ^ static_cast<std::uint64_t>(static_cast<int>(strategy) + 1);
}

std::optional<std::size_t> RunArtifact::find(Strategy strategy) const {
  const auto it = std::find(strategies.begin(), strategies.end(), strategy);
  if (it == strategies.end()) return std::nullopt;
  return static_cast<std::size_t>(it - strategies.begin());
}

std::size_t RunArtifact::index_of(Strategy strategy) const {
  const auto found = find(strategy);
  if (!found) throw ConfigError("run has no strategy '" + std::string(to_string(strategy)) + "'");
  return *found;
}

void validate_config(const ExperimentConfig& config) {
  if (config.strategies.empty()) throw ConfigError("no strategies configured");
  const std::set<Strategy> unique(config.strategies.begin(), config.strategies.end());
  if (unique.size() != config.strategies.size()) throw ConfigError("duplicate strategies configured");
  if (config.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (config.num_batches < 0) throw ConfigError("number of batches must be >= 0");
  if (!(config.lifetime > 0.0)) throw ConfigError("lifetime must be > 0");
  if (config.max_depth < 0) throw ConfigError("max depth must be >= 0");
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
}

RunArtifact run_experiment(const ExperimentConfig& config, const Dataset& dataset) {
  validate_config(config);
  const auto parts = split(dataset, SplitSpec{config.test_fraction, config.seed});
  const Index pool_size = parts.pool.rows();
  if (config.batch_size * config.num_batches > pool_size) {
    throw ConfigError("pool exhausted: " + std::to_string(config.num_batches) + " batches of " +
                      std::to_string(config.batch_size) + " exceed pool size " + std::to_string(pool_size));
  }

  // The tree sees pool-fitted unit-box coordinates; test points outside the
  // box fall into boundary leaves.
  const Scaler scaler = Scaler::unit_box(parts.pool.features);
  const RowMatrix pool_x = scaler.transform(parts.pool.features);
  const RowMatrix test_x = scaler.transform(parts.test.features);
  const TreePartition partition =
      build_partition(pool_x, PartitionParams{config.lifetime, config.max_depth, partition_seed(config.seed)});
  std::vector<NodeId> pool_leaf(static_cast<std::size_t>(pool_size));
  for (Index i = 0; i < pool_size; ++i) pool_leaf[static_cast<std::size_t>(i)] = partition.leaf_of(pool_x.row(i));
  log::debug("partition: " + std::to_string(partition.leaves().size()) + " leaves over " +
             std::to_string(pool_size) + " pool points");

  std::vector<std::future<StrategyRun>> pending;
  for (const Strategy s : config.strategies) {
    pending.push_back(std::async(std::launch::async, run_strategy, s, std::cref(config), std::cref(partition),
                                 std::cref(pool_x), std::cref(parts.pool.labels), std::cref(pool_leaf),
                                 std::cref(test_x), std::cref(parts.test.labels)));
  }

  RunArtifact artifact;
  artifact.config = config;
  artifact.dataset_hash = dataset.content_hash;
  artifact.strategies = config.strategies;
  artifact.mse.resize(static_cast<Index>(config.strategies.size()), config.num_batches + 1);
  for (std::size_t s = 0; s < pending.size(); ++s) {
    auto run = pending[s].get();
    artifact.mse.row(static_cast<Index>(s)) = run.mse.transpose();
    artifact.predictions.push_back(std::move(run.predictions));
    artifact.queried_indices.push_back(std::move(run.queried_indices));
    artifact.queried_labels.push_back(std::move(run.queried_labels));
  }
  artifact.test_labels = parts.test.labels;

  if (parts.test.rows() >= 2 && parts.test.dims() >= 2) {
    const auto pc = pca_fit(parts.test.features, config.standardize_embedding);
    artifact.pc_coords = project(pc, parts.test.features);
    artifact.pc_explained_variance = pc.explained_variance_ratio;
  } else {
    // One-feature or single-row test sets: identity coordinates.
    artifact.pc_coords = Coords2::Zero(parts.test.rows(), 2);
    artifact.pc_coords.col(0) = parts.test.features.col(0);
    artifact.pc_explained_variance = {1.0, 0.0};
  }
  return artifact;
}

void validate_artifact(const RunArtifact& a) {
  auto fail = [](const std::string& what) { throw DataError("invalid run artifact: " + what); };
  if (a.schema_version != RunArtifact::kSchemaVersion) fail("unsupported schema_version");
  const auto s_count = a.strategies.size();
  if (s_count == 0) fail("no strategies");
  if (std::set<Strategy>(a.strategies.begin(), a.strategies.end()).size() != s_count) fail("duplicate strategies");
  const Index q = a.num_batches();
  const Index n = a.n_test();
  if (q < 0 || a.mse.rows() != static_cast<Index>(s_count)) fail("mse shape");
  if (a.predictions.size() != s_count || a.queried_indices.size() != s_count || a.queried_labels.size() != s_count) {
    fail("per-strategy array count");
  }
  if (a.pc_coords.rows() != n) fail("pc_coords length");
  for (const double r : a.pc_explained_variance)
    if (!(r >= 0.0 && r <= 1.0)) fail("explained variance outside [0, 1]");
  if (!a.test_labels.allFinite() || !a.pc_coords.allFinite()) fail("non-finite labels or coordinates");
  for (std::size_t s = 0; s < s_count; ++s) {
    const auto& p = a.predictions[s];
    if (p.rows() != q + 1 || p.cols() != n) fail("predictions shape");
    if (!p.allFinite()) fail("non-finite prediction");
    const auto& qi = a.queried_indices[s];
    const auto& ql = a.queried_labels[s];
    if (qi.rows() != q || ql.rows() != q || qi.cols() != ql.cols()) fail("queried arrays shape");
    if (q > 0 && qi.cols() != a.config.batch_size) fail("queried batch width");
    std::set<Index> seen;
    for (Index i = 0; i < qi.size(); ++i) {
      if (qi.data()[i] < 0 || !seen.insert(qi.data()[i]).second) fail("queried indices not distinct");
    }
    if (!ql.allFinite()) fail("non-finite queried label");
    for (Index k = 0; k <= q; ++k) {
      const double recomputed = n > 0 ? mse(p.row(k).transpose(), a.test_labels) : 0.0;
      if (!(std::abs(recomputed - a.mse(static_cast<Index>(s), k)) <= 1e-9 * std::max(1.0, std::abs(recomputed)))) {
        fail("mse inconsistent with predictions");
      }
    }
  }
}

}  // namespace alviz
