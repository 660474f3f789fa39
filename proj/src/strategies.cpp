#include "alviz/strategies.hpp"

#include "alviz/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace alviz {
namespace {

void require_pool(std::span<const Index> unlabeled, Index k) {
  if (k < 0 || static_cast<std::size_t>(k) > unlabeled.size()) {
    throw ConfigError("pool exhausted: need " + std::to_string(k) + " unlabeled points, have " +
                      std::to_string(unlabeled.size()));
  }
}

// Largest-remainder split of `units` over `open` entries.
std::vector<Index> largest_remainder(std::span<const double> weights, const std::vector<std::size_t>& open,
                                     Index units) {
  double total = 0.0;
  for (const auto i : open) total += weights[i];
  std::vector<Index> share(open.size(), 0);
  std::vector<double> frac(open.size(), 0.0);
  Index assigned = 0;
  for (std::size_t j = 0; j < open.size(); ++j) {
    const double exact = static_cast<double>(units) * weights[open[j]] / total;
    const double whole = std::floor(exact);
    share[j] = static_cast<Index>(whole);
    frac[j] = exact - whole;
    assigned += share[j];
  }
  std::vector<std::size_t> order(open.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t r = 0; assigned < units; r = (r + 1) % order.size()) {
    ++share[order[r]];
    ++assigned;
  }
  return share;
}

}  // namespace

Strategy parse_strategy(std::string_view name) {
  if (name == "al") return Strategy::al;
  if (name == "uc") return Strategy::uc;
  if (name == "rn") return Strategy::rn;
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::al: return "al";
    case Strategy::uc: return "uc";
    case Strategy::rn: return "rn";
  }
  return "?";
}

std::vector<Strategy> parse_strategy_list(std::string_view csv) {
  std::vector<Strategy> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    auto pos = csv.find(',', start);
    if (pos == std::string_view::npos) pos = csv.size();
    const auto token = csv.substr(start, pos - start);
    if (!token.empty()) {
      const auto s = parse_strategy(token);
      if (std::find(out.begin(), out.end(), s) != out.end()) {
        throw ConfigError("duplicate strategy '" + std::string(token) + "'");
      }
      out.push_back(s);
    }
    start = pos + 1;
  }
  if (out.empty()) throw ConfigError("strategy list is empty");
  return out;
}

std::vector<Index> apportion(std::span<const double> weights, std::span<const double> fallback_weights,
                             std::span<const Index> caps, Index k) {
  const std::size_t n = weights.size();
  if (fallback_weights.size() != n || caps.size() != n) throw ConfigError("apportion: size mismatch");
  if (std::accumulate(caps.begin(), caps.end(), Index{0}) < k) throw ConfigError("apportion: caps below k");

  std::vector<Index> quota(n, 0);
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < n; ++i)
    if (caps[i] > 0) open.push_back(i);

  const std::vector<double> equal(n, 1.0);
  Index remaining = k;
  while (remaining > 0) {
    auto total_of = [&](std::span<const double> w) {
      double t = 0.0;
      for (const auto i : open) t += w[i];
      return t;
    };
    std::span<const double> w = weights;
    if (!(total_of(w) > 0.0)) w = fallback_weights;
    if (!(total_of(w) > 0.0)) w = equal;

    const auto share = largest_remainder(w, open, remaining);
    std::vector<std::size_t> still_open;
    bool capped = false;
    for (std::size_t j = 0; j < open.size(); ++j) capped = capped || share[j] > caps[open[j]];
    if (!capped) {
      for (std::size_t j = 0; j < open.size(); ++j) quota[open[j]] += share[j];
      break;
    }
    for (std::size_t j = 0; j < open.size(); ++j) {
      const auto i = open[j];
      if (share[j] > caps[i]) {
        quota[i] = caps[i];
        remaining -= caps[i];
      } else {
        still_open.push_back(i);
      }
    }
    open = std::move(still_open);
  }
  return quota;
}

std::vector<Index> select_batch_rn(std::span<const Index> unlabeled, Index k, Rng& rng) {
  require_pool(unlabeled, k);
  std::vector<Index> pool(unlabeled.begin(), unlabeled.end());
  for (Index i = 0; i < k; ++i) {
    const auto j = i + static_cast<Index>(rng.uniform_index(pool.size() - static_cast<std::size_t>(i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

std::vector<Index> select_batch_uc(const LeafStats& stats, std::span<const NodeId> pool_leaf,
                                   std::span<const Index> unlabeled, Index k) {
  require_pool(unlabeled, k);
  std::vector<std::pair<double, Index>> scored;
  scored.reserve(unlabeled.size());
  for (const Index i : unlabeled) scored.emplace_back(leaf_std(stats, pool_leaf[static_cast<std::size_t>(i)]), i);
  const auto mid = scored.begin() + k;
  std::partial_sort(scored.begin(), mid, scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(k));
  for (auto it = scored.begin(); it != mid; ++it) out.push_back(it->second);
  return out;
}

std::vector<Index> select_batch_al(const LeafStats& stats, std::span<const NodeId> pool_leaf,
                                   std::span<const Index> unlabeled, Index k, Rng& rng) {
  require_pool(unlabeled, k);
  std::map<NodeId, std::vector<Index>> by_leaf;
  for (const Index i : unlabeled) by_leaf[pool_leaf[static_cast<std::size_t>(i)]].push_back(i);

  std::vector<double> weight, mass;
  std::vector<Index> caps;
  for (const auto& [leaf, members] : by_leaf) {
    mass.push_back(stats.pool_mass(leaf));
    weight.push_back(stats.pool_mass(leaf) * leaf_std(stats, leaf));
    caps.push_back(static_cast<Index>(members.size()));
  }
  const auto quota = apportion(weight, mass, caps, k);

  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(k));
  std::size_t j = 0;
  for (const auto& [leaf, members] : by_leaf) {
    const auto picked = select_batch_rn(members, quota[j++], rng);
    out.insert(out.end(), picked.begin(), picked.end());
  }
  return out;
}

}  // namespace alviz
