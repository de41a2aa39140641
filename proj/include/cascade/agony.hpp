#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cascade/graph.hpp"

namespace cascade {

// Rank per node of some Digraph, indexed by the graph's dense node index.
// Smaller rank means higher in the hierarchy.
using Ranking = std::vector<std::int64_t>;

struct AgonyResult {
  std::int64_t agony = 0;
  Ranking ranking;
  // false when a time budget cut the solver short; `agony` is then an upper
  // bound attained by `ranking`.
  bool exact = true;
};

struct AgonyOptions {
  std::optional<std::chrono::steady_clock::duration> time_budget;
};

// Sum over arcs (u,v) of max(r(u) - r(v) + 1, 0). Throws std::invalid_argument
// when the ranking does not cover every node.
std::int64_t agony_of_ranking(const Digraph& g, std::span<const std::int64_t> ranking);

// Exact minimum agony with a witnessing ranking compressed to levels 0..L.
//
// Minimum agony equals the size of a maximum Eulerian subgraph (its LP dual),
// so each strongly connected component is solved as a unit-capacity
// max-weight circulation: saturate every arc, then repair the imbalance along
// cheapest residual paths (successive shortest paths with Dijkstra
// potentials). The ranking is read off the optimal residual distances.
AgonyResult min_agony(const Digraph& g, const AgonyOptions& options = {});

// Minimum agony value only. Components are summed in order and the scan
// stops as soon as the running total exceeds `stop_above`, in which case the
// returned value is some number > stop_above rather than the exact minimum.
std::int64_t min_agony_value(
    const Digraph& g,
    std::int64_t stop_above = std::numeric_limits<std::int64_t>::max());

inline constexpr std::size_t kBruteForceMaxNodes = 7;

// Exhaustive minimum over all maps V -> {0..|V|-1}; test oracle. Throws
// std::invalid_argument above kBruteForceMaxNodes nodes.
AgonyResult min_agony_bruteforce(const Digraph& g);

// Order-preserving compression of rank values to 0..L. Never increases agony.
Ranking canonicalize(std::span<const std::int64_t> ranking);

}  // namespace cascade
