#include "alviz/histogram.hpp"

#include "alviz/errors.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace alviz {

Index Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), Index{0}); }

std::vector<double> bin_edges(double lo, double hi, Index bins) {
  if (bins < 1) throw ConfigError("histogram needs at least one bin");
  if (!(lo <= hi)) throw ConfigError("histogram range is inverted");
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> edges(static_cast<std::size_t>(bins + 1));
  const double width = (hi - lo) / static_cast<double>(bins);
  for (Index i = 0; i < bins; ++i) edges[static_cast<std::size_t>(i)] = lo + static_cast<double>(i) * width;
  edges.back() = hi;
  return edges;
}

Histogram histogram(std::span<const double> values, std::span<const double> edges) {
  if (edges.size() < 2) throw ConfigError("histogram needs at least two edges");
  Histogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0);
  const auto bins = static_cast<std::ptrdiff_t>(h.counts.size());
  for (const double v : values) {
    if (v < edges.front() || v > edges.back()) continue;
    auto bin = std::upper_bound(edges.begin(), edges.end(), v) - edges.begin() - 1;
    bin = std::clamp<std::ptrdiff_t>(bin, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(bin)];
  }
  return h;
}

std::vector<double> queried_prefix(const RunArtifact& artifact, std::size_t strategy_slot, Index prefix) {
  if (prefix < 0) throw ConfigError("prefix must be >= 0");
  const auto& labels = artifact.queried_labels[strategy_slot];
  const Index take = std::min<Index>(prefix, labels.size());
  return std::vector<double>(labels.data(), labels.data() + take);
}

QueryHistograms query_histograms(const RunArtifact& artifact, Index prefix, Index bins,
                                 std::span<const double> reference_labels) {
  if (prefix < 0) throw ConfigError("prefix must be >= 0");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto widen = [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (const double v : reference_labels) widen(v);
  for (const auto& m : artifact.queried_labels)
    for (Index i = 0; i < m.size(); ++i) widen(m.data()[i]);
  if (lo > hi) lo = hi = 0.0;

  QueryHistograms out;
  const auto edges = bin_edges(lo, hi, bins);
  out.strategies = artifact.strategies;
  out.reference = histogram(reference_labels, edges);
  Index total_queries = 0;
  for (std::size_t s = 0; s < artifact.strategies.size(); ++s) {
    const auto values = queried_prefix(artifact, s, prefix);
    total_queries = std::max<Index>(total_queries, static_cast<Index>(values.size()));
    out.per_strategy.push_back(histogram(values, edges));
  }
  out.prefix = total_queries;
  return out;
}

}  // namespace alviz
