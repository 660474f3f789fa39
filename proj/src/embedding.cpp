#include "alviz/embedding.hpp"

#include <algorithm>
#include <numeric>

namespace alviz {
namespace {

std::vector<Index> closest_first(const Coords2& coords, std::vector<Index> candidates, double ax, double ay,
                                 Index keep) {
  std::vector<std::pair<double, Index>> keyed;
  keyed.reserve(candidates.size());
  for (const Index i : candidates) {
    const double dx = coords(i, 0) - ax;
    const double dy = coords(i, 1) - ay;
    keyed.emplace_back(dx * dx + dy * dy, i);
  }
  const auto mid = keyed.begin() + std::min<Index>(keep, static_cast<Index>(keyed.size()));
  std::partial_sort(keyed.begin(), mid, keyed.end());
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(mid - keyed.begin()));
  for (auto it = keyed.begin(); it != mid; ++it) out.push_back(it->second);
  return out;
}

}  // namespace

Selection nearest_k(const Coords2& coords, std::array<double, 2> anchor, Index k) {
  if (k < 1) throw ConfigError("nearest_k: k must be >= 1");
  if (k > coords.rows()) {
    throw ConfigError("nearest_k: k = " + std::to_string(k) + " exceeds " + std::to_string(coords.rows()) +
                      " points");
  }
  std::vector<Index> all(static_cast<std::size_t>(coords.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  Selection sel;
  sel.indices = closest_first(coords, std::move(all), anchor[0], anchor[1], k);
  sel.anchor = anchor;
  sel.k = k;
  return sel;
}

Selection select_rect(const Coords2& coords, const Rect& rect, Index cap) {
  if (!(rect.pc1_lo <= rect.pc1_hi) || !(rect.pc2_lo <= rect.pc2_hi)) {
    throw ConfigError("select_rect: inverted rectangle");
  }
  if (cap < 0) throw ConfigError("select_rect: cap must be >= 0");
  std::vector<Index> inside;
  for (Index i = 0; i < coords.rows(); ++i) {
    const double x = coords(i, 0);
    const double y = coords(i, 1);
    if (x >= rect.pc1_lo && x <= rect.pc1_hi && y >= rect.pc2_lo && y <= rect.pc2_hi) inside.push_back(i);
  }
  if (static_cast<Index>(inside.size()) > cap) {
    inside = closest_first(coords, std::move(inside), 0.5 * (rect.pc1_lo + rect.pc1_hi),
                           0.5 * (rect.pc2_lo + rect.pc2_hi), cap);
    std::sort(inside.begin(), inside.end());
  }
  Selection sel;
  sel.indices = std::move(inside);
  sel.k = cap;
  return sel;
}

}  // namespace alviz
