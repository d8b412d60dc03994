#pragma once

// Edge censuses: counts of long edges and edge-length order statistics.
//
// Pendant edges belong to particles alive at the census time (their length is
// census time minus birth and still growing); interior edges belong to
// particles that died at or before it (their length is the full lifetime).
// Censusing a tree at an earlier time s than its simulation horizon re-censors
// the same realization: an edge is present once its particle is born, and an
// edge whose particle is alive at s is pendant there even if it later died.
// This exact coupling across census times is what the convergence diagnostics
// rely on (interior and all-edge longest lengths are nondecreasing in s, a
// pendant edge grows at unit speed until it freezes).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gwedge/tree.hpp"

namespace gwedge {

enum class EdgeClass { pendant = 0, interior = 1, all = 2 };

inline const char* edge_class_name(EdgeClass c) {
  switch (c) {
    case EdgeClass::pendant: return "pendant";
    case EdgeClass::interior: return "interior";
    default: return "all";
  }
}

struct EdgeCensus {
  double census_time = 0.0;
  std::vector<double> thresholds;  // strictly ascending, nonnegative
  // counts[class][i] = number of edges of that class with length >= thresholds[i]
  std::array<std::vector<std::uint64_t>, 3> counts;
  // lengths[class] sorted descending; [all] is the merge of the other two
  std::array<std::vector<double>, 3> lengths;

  std::uint64_t alive() const {
    return static_cast<std::uint64_t>(lengths[0].size());
  }
};

namespace detail {

inline void check_thresholds(const std::vector<double>& thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0) || !std::isfinite(thresholds[i]))
      throw std::invalid_argument("census thresholds must be finite and >= 0");
    if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
      throw std::invalid_argument("census thresholds must be strictly ascending");
  }
}

// In a descending-sorted list, the number of entries >= l.
inline std::uint64_t count_at_least(const std::vector<double>& desc, double l) {
  auto it = std::lower_bound(desc.begin(), desc.end(), l,
                             [](double value, double key) { return value >= key; });
  return static_cast<std::uint64_t>(it - desc.begin());
}

}  // namespace detail

// Census of the tree re-censored at time s <= tree.horizon.
inline EdgeCensus census_at(const SimTree& tree, double s,
                            const std::vector<double>& thresholds) {
  if (!(s >= 0.0) || !(s <= tree.horizon))
    throw std::invalid_argument("census time must lie in [0, horizon]");
  detail::check_thresholds(thresholds);

  EdgeCensus out;
  out.census_time = s;
  out.thresholds = thresholds;
  for (const EdgeRecord& e : tree.edges) {
    if (e.birth_time > s) continue;
    const bool alive = e.censored || e.end_time > s;
    if (alive)
      out.lengths[0].push_back(s - e.birth_time);
    else
      out.lengths[1].push_back(e.length());
  }
  for (int c = 0; c < 2; ++c)
    std::sort(out.lengths[c].begin(), out.lengths[c].end(), std::greater<>());
  out.lengths[2].resize(out.lengths[0].size() + out.lengths[1].size());
  std::merge(out.lengths[0].begin(), out.lengths[0].end(), out.lengths[1].begin(),
             out.lengths[1].end(), out.lengths[2].begin(), std::greater<>());
  for (int c = 0; c < 3; ++c) {
    out.counts[c].reserve(thresholds.size());
    for (double l : thresholds) out.counts[c].push_back(detail::count_at_least(out.lengths[c], l));
  }
  return out;
}

inline EdgeCensus census(const SimTree& tree, const std::vector<double>& thresholds) {
  return census_at(tree, tree.horizon, thresholds);
}

// Length of the k-th longest edge (k >= 1) of the class, if that many exist.
inline std::optional<double> kth_longest(const EdgeCensus& c, EdgeClass cls, int k) {
  if (k < 1) throw std::invalid_argument("order index k must be >= 1");
  const auto& v = c.lengths[static_cast<int>(cls)];
  if (static_cast<std::size_t>(k) > v.size()) return std::nullopt;
  return v[static_cast<std::size_t>(k) - 1];
}

// One-pass census summary: threshold counts plus the top_k longest lengths
// per class, without materializing sorted length lists. Agrees with census_at
// on every tree; used by replicate farms where only these summaries are kept.
struct SnapshotStats {
  std::uint64_t alive = 0;
  std::array<std::vector<std::uint64_t>, 3> counts;
  std::array<std::vector<double>, 3> top;  // descending, size <= top_k
};

inline SnapshotStats snapshot_stats(const SimTree& tree, double s,
                                    const std::vector<double>& thresholds, int top_k) {
  if (!(s >= 0.0) || !(s <= tree.horizon))
    throw std::invalid_argument("census time must lie in [0, horizon]");
  detail::check_thresholds(thresholds);
  if (top_k < 0) throw std::invalid_argument("top_k must be >= 0");

  SnapshotStats out;
  for (int c = 0; c < 3; ++c) {
    out.counts[c].assign(thresholds.size(), 0);
    out.top[c].reserve(static_cast<std::size_t>(top_k));
  }
  auto note = [&](int cls, double len) {
    auto& counts = out.counts[cls];
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (len >= thresholds[i])
        ++counts[i];
      else
        break;  // thresholds ascend, the rest cannot match either
    }
    auto& top = out.top[cls];
    if (top.size() < static_cast<std::size_t>(top_k)) {
      top.insert(std::upper_bound(top.begin(), top.end(), len, std::greater<>()), len);
    } else if (top_k > 0 && len > top.back()) {
      top.pop_back();
      top.insert(std::upper_bound(top.begin(), top.end(), len, std::greater<>()), len);
    }
  };
  for (const EdgeRecord& e : tree.edges) {
    if (e.birth_time > s) continue;
    const bool alive = e.censored || e.end_time > s;
    const double len = alive ? s - e.birth_time : e.length();
    if (alive) {
      ++out.alive;
      note(0, len);
    } else {
      note(1, len);
    }
    note(2, len);
  }
  return out;
}

}  // namespace gwedge
