#pragma once

#include "alviz/dataset.hpp"
#include "alviz/rng.hpp"
#include "alviz/tree_model.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace alviz {

// Query strategies. The numeric code is stable and seeds per-strategy
// streams, so it must not depend on the order strategies are listed in.
enum class Strategy : int { al = 0, uc = 1, rn = 2 };

Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy strategy);
// Comma-separated, e.g. "al,uc,rn". Rejects empty lists and duplicates.
std::vector<Strategy> parse_strategy_list(std::string_view csv);

// Uniform sample of k without replacement (partial Fisher-Yates).
std::vector<Index> select_batch_rn(std::span<const Index> unlabeled, Index k, Rng& rng);

// k highest leaf stds, ties by ascending pool index. pool_leaf maps pool
// index -> leaf id.
std::vector<Index> select_batch_uc(const LeafStats& stats, std::span<const NodeId> pool_leaf,
                                   std::span<const Index> unlabeled, Index k);

// Neyman allocation over leaves (weight = pool mass * leaf std), uniform
// sampling without replacement within each leaf.
std::vector<Index> select_batch_al(const LeafStats& stats, std::span<const NodeId> pool_leaf,
                                   std::span<const Index> unlabeled, Index k, Rng& rng);

// Largest-remainder apportionment of k units proportional to weights, each
// entry capped by caps[i]. Units that a capped entry cannot take are
// re-apportioned over the remaining entries by the same rule. Remainder
// ties go to the lower position. When the weights of every open entry sum
// to zero, fallback_weights are used instead, then equal weights.
// Requires sum(caps) >= k.
std::vector<Index> apportion(std::span<const double> weights, std::span<const double> fallback_weights,
                             std::span<const Index> caps, Index k);

}  // namespace alviz
