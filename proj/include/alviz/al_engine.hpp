#pragma once

#include "alviz/dataset.hpp"
#include "alviz/strategies.hpp"
#include "alviz/tree_model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace alviz {

using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ExperimentConfig {
  std::vector<Strategy> strategies{Strategy::al, Strategy::uc, Strategy::rn};
  Index batch_size = 500;
  Index num_batches = 15;
  std::uint64_t seed = 0;
  double lifetime = 2.0;
  int max_depth = 20;
  double test_fraction = 9730.0 / 45730.0;
  bool standardize_embedding = true;
  std::string data_source;
  std::string target;

  bool operator==(const ExperimentConfig&) const = default;
};

// Seeds derived from ExperimentConfig::seed. The split uses the seed as is.
std::uint64_t partition_seed(std::uint64_t seed);
std::uint64_t strategy_seed(std::uint64_t seed, Strategy strategy);

// Everything one experiment produced. Snapshot q = 0 is the empty model.
struct RunArtifact {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  ExperimentConfig config;
  std::uint64_t dataset_hash = 0;
  std::vector<Strategy> strategies;
  std::vector<RowMatrix> predictions;        // per strategy: (Q+1) x N_test
  std::vector<IndexMatrix> queried_indices;  // per strategy: Q x batch_size, pool indices
  std::vector<RowMatrix> queried_labels;     // per strategy: Q x batch_size
  RowMatrix mse;                             // S x (Q+1)
  Eigen::VectorXd test_labels;
  Coords2 pc_coords;                         // N_test x 2
  std::array<double, 2> pc_explained_variance{0.0, 0.0};

  Index num_strategies() const { return static_cast<Index>(strategies.size()); }
  Index num_batches() const { return mse.cols() - 1; }
  Index n_test() const { return test_labels.size(); }

  std::optional<std::size_t> find(Strategy strategy) const;
  // Throws ConfigError for a strategy the run does not contain.
  std::size_t index_of(Strategy strategy) const;
};

// Throws ConfigError when the config cannot run against a pool of this size.
void validate_config(const ExperimentConfig& config);

// Split, build one partition shared by all strategies, run every strategy's
// query loop, and embed the test set.
RunArtifact run_experiment(const ExperimentConfig& config, const Dataset& dataset);

// Throws DataError naming the first violated RunArtifact invariant.
void validate_artifact(const RunArtifact& artifact);

}  // namespace alviz
