#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace alviz {

using Index = Eigen::Index;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Coords2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

// Feature matrix plus regression target. Rows are samples.
struct Dataset {
  RowMatrix features;  // N x d
  Eigen::VectorXd labels;
  std::vector<std::string> feature_names;
  std::string target_name = "y";
  std::string source_id;
  std::uint64_t content_hash = 0;

  Index rows() const { return features.rows(); }
  Index dims() const { return features.cols(); }

  // Rows in the given order; provenance fields are copied.
  Dataset subset(std::span<const Index> row_ids) const;
};

Dataset parse_csv(std::string_view text, std::string_view target_column, char delimiter = ',',
                  std::string source_id = "<memory>");
Dataset load_csv(const std::filesystem::path& path, std::string_view target_column,
                 char delimiter = ',');

// Target column first, then features; floats at 17 significant digits.
std::string to_csv(const Dataset& dataset, char delimiter = ',');
void write_csv(const Dataset& dataset, const std::filesystem::path& path, char delimiter = ',');

struct SplitSpec {
  double test_fraction = 9730.0 / 45730.0;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset pool;
  Dataset test;
  std::vector<Index> pool_rows;  // row ids into the source dataset
  std::vector<Index> test_rows;
};

// Seeded Fisher-Yates over row ids; the first round(N * test_fraction)
// shuffled ids form the test set, the rest the pool.
Split split(const Dataset& dataset, const SplitSpec& spec);

enum class SyntheticKind { clusters, piecewise_constant, plane };

SyntheticKind parse_synthetic_kind(std::string_view name);
std::string_view to_string(SyntheticKind kind);

// Fixture generators, deterministic per seed.
//   clusters: four Gaussian blobs (spread 0.5) around centers in [-6, 6]^d,
//     label = 5 * cluster id + noise.
//   piecewise_constant: uniform on [0, 1]^d; a 3-bin axis-aligned grid over
//     the first min(d, 3) dimensions, one constant label per cell, + noise.
//   plane: a 2-D affine subspace of R^d plus isotropic feature noise;
//     label = sin(u) + 0.5 v of the plane coordinates (u, v).
Dataset make_synthetic(SyntheticKind kind, Index n, Index d, double noise_sd, std::uint64_t seed);

// Ground truth of the piecewise_constant generator: labels are constant on
// the cells of a 3-bin grid (closed upper cut) over the leading dimensions.
struct PiecewiseConstantField {
  std::vector<std::array<double, 2>> cuts;
  std::vector<double> levels;

  std::size_t cell_of(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& x) const { return levels[cell_of(x)]; }
};

// The field make_synthetic(piecewise_constant, *, d, *, seed) labels with.
PiecewiseConstantField piecewise_constant_field(Index d, std::uint64_t seed);

inline constexpr double kScaleFloor = 1e-12;

// Per-feature affine map x -> (x - center) / scale.
class Scaler {
 public:
  Scaler() = default;
  Scaler(Eigen::VectorXd center, Eigen::VectorXd scale);

  // center = mean, scale = population std.
  static Scaler standard(const RowMatrix& features);
  // center = min, scale = max - min; maps the bounding box onto [0, 1]^d.
  static Scaler unit_box(const RowMatrix& features);

  RowMatrix transform(const RowMatrix& features) const;
  RowMatrix inverse_transform(const RowMatrix& scaled) const;

  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::VectorXd& scale() const { return scale_; }

 private:
  Eigen::VectorXd center_;
  Eigen::VectorXd scale_;
};

}  // namespace alviz
