#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cascade/graph.hpp"

namespace cascade {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  double accuracy() const;
};

// Counts over `universe`; every truth and learned arc must belong to it.
// Throws std::invalid_argument on an empty universe or a stray arc.
ConfusionCounts arc_accuracy(std::span<const Arc> truth, std::span<const Arc> learned,
                             std::span<const Arc> universe);

// All ordered pairs inside each group, unioned.
std::vector<Arc> group_pair_universe(const std::vector<std::vector<NodeIndex>>& groups);

// Social arcs with both ends inside one group, unioned.
std::vector<Arc> group_social_universe(const std::vector<std::vector<NodeIndex>>& groups,
                                       const Digraph& social);

enum class Universe { kGroupPairs, kGroupSocial };
std::string to_string(Universe universe);
Universe parse_universe(const std::string& name);

// Mutual information over the arithmetic mean of the two entropies, natural
// log. Two single-cluster labelings give 1; exactly one gives 0. Throws
// std::invalid_argument on size mismatch or fewer than two elements.
double nmi(std::span<const std::size_t> a, std::span<const std::size_t> b);

struct Summary {
  double mean = 0.0;
  double stdev = 0.0;  // sample standard deviation, 0 for a single value
};

Summary summarize(std::span<const double> values);

}  // namespace cascade
