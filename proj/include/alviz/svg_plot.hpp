#pragma once

#include "alviz/histogram.hpp"
#include "alviz/prediction_change.hpp"

#include <cstdint>
#include <span>
#include <string>

namespace alviz::svg {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kNegative{0x21, 0x66, 0xAC};
inline constexpr Rgb kZero{0xFF, 0xFF, 0xFF};
inline constexpr Rgb kPositive{0xB2, 0x18, 0x2B};

// Blue -> white -> red, linear in sRGB over [-range, range]; white at zero
// and everywhere when range is not positive.
Rgb diverging_color(double value, double range);
std::string hex(Rgb color);

// max |value| over every matrix.
double symmetric_range(std::span<const ChangeMatrix> matrices);

// One mesh-grid panel: rows = selected test points, columns = batches.
std::string heatmap(const ChangeMatrix& matrix, double range);
// MSE per strategy over q = 0..Q.
std::string mse_curves(const RunArtifact& artifact);
// PC1 vs PC2 coloured by true label; `selected` points overplotted in red.
std::string pca_scatter(const RunArtifact& artifact, std::span<const Index> selected);
// Overlaid density outlines: reference labels and each strategy's queries.
std::string query_histograms(const QueryHistograms& histograms);

// Edges and counts, one row per bin.
std::string histogram_csv(const QueryHistograms& histograms);

}  // namespace alviz::svg
