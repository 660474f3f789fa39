#pragma once

#include "alviz/al_engine.hpp"

#include <span>
#include <vector>

namespace alviz {

inline constexpr Index kDefaultBins = 40;

// counts[i] holds values in [edges[i], edges[i+1]); the last bin is closed.
struct Histogram {
  std::vector<double> edges;
  std::vector<Index> counts;

  Index total() const;
};

// bins + 1 equally spaced edges; a zero-width range is widened by 0.5 each way.
std::vector<double> bin_edges(double lo, double hi, Index bins);
Histogram histogram(std::span<const double> values, std::span<const double> edges);

struct QueryHistograms {
  std::vector<Strategy> strategies;
  std::vector<Histogram> per_strategy;
  Histogram reference;
  Index prefix = 0;  // queries counted per strategy, after clamping
};

// The first `prefix` queried labels of each strategy, in query order. A
// prefix beyond the number of queries made is clamped.
std::vector<double> queried_prefix(const RunArtifact& artifact, std::size_t strategy_slot, Index prefix);

// Per-strategy histograms of queried labels plus the reference label
// distribution, all on shared edges spanning the reference and every query.
QueryHistograms query_histograms(const RunArtifact& artifact, Index prefix, Index bins,
                                 std::span<const double> reference_labels);

}  // namespace alviz
