#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cascade/graph.hpp"
#include "cascade/propagation.hpp"

namespace cascade::testing {

// Social graph of the three-entity toy example, undirected edges written as
// both arcs. Edge set chosen to reproduce the drawn propagation DAGs.
inline const char* kToyGraph = R"(# toy social graph
v1 v2
v2 v1
v2 v3
v3 v2
v2 v4
v4 v2
v3 v4
v4 v3
v4 v5
v5 v4
v5 v7
v7 v5
v6 v7
v7 v6
v3 v6
v6 v3
v4 v7
v7 v4
)";

inline const char* kToyObservations = R"(node,entity,time
v2,phi1,2
v3,phi1,4
v4,phi1,5
v5,phi1,7
v2,phi2,1
v1,phi2,3
v5,phi2,6
v7,phi2,7
v6,phi2,8
v3,phi2,9
v1,phi3,1
v2,phi3,3
v6,phi3,5
v7,phi3,7
v4,phi3,8
)";

inline Dataset toy_dataset() {
  std::istringstream g(kToyGraph);
  std::istringstream o(kToyObservations);
  return ingest(o, read_graph(g));
}

inline Digraph cycle_graph(std::size_t k, std::size_t offset = 0, std::size_t n = 0) {
  std::vector<Arc> arcs;
  for (std::size_t i = 0; i < k; ++i) {
    arcs.push_back({static_cast<NodeIndex>(offset + i),
                    static_cast<NodeIndex>(offset + (i + 1) % k)});
  }
  return Digraph(std::max(n, offset + k), arcs);
}

// Uniform random digraph: each ordered pair present with probability p.
inline Digraph random_digraph(std::mt19937_64& rng, std::size_t n, double p) {
  std::bernoulli_distribution coin(p);
  std::vector<Arc> arcs;
  for (NodeIndex u = 0; u < n; ++u) {
    for (NodeIndex v = 0; v < n; ++v) {
      if (u != v && coin(rng)) arcs.push_back({u, v});
    }
  }
  return Digraph(n, arcs);
}

}  // namespace cascade::testing
