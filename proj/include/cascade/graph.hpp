#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <vector>

namespace cascade {

using NodeIndex = std::uint32_t;

struct Arc {
  NodeIndex from = 0;
  NodeIndex to = 0;

  friend auto operator<=>(const Arc&, const Arc&) = default;
};

// Simple directed graph over dense node indices 0..n-1. Arcs are kept sorted
// and unique; self-loops are rejected.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(std::size_t num_nodes);
  Digraph(std::size_t num_nodes, std::vector<Arc> arcs);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_arcs() const { return arcs_.size(); }
  const std::vector<Arc>& arcs() const { return arcs_; }

  std::span<const NodeIndex> out(NodeIndex u) const {
    return {out_targets_.data() + out_offsets_[u],
            out_offsets_[u + 1] - out_offsets_[u]};
  }
  std::span<const NodeIndex> in(NodeIndex v) const {
    return {in_sources_.data() + in_offsets_[v],
            in_offsets_[v + 1] - in_offsets_[v]};
  }

  bool has_arc(NodeIndex u, NodeIndex v) const;

 private:
  std::size_t num_nodes_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<NodeIndex> out_targets_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<NodeIndex> in_sources_;
};

// True iff the underlying undirected graph has exactly one component.
// A single node counts as connected; the empty graph does not.
bool is_weakly_connected(const Digraph& g);

// Weak component label per node, labels contiguous from 0 in order of the
// lowest node index of each component.
std::vector<std::uint32_t> weak_components(const Digraph& g);

// Strongly connected component label per node (Tarjan, iterative). Labels are
// assigned in reverse topological order of the condensation.
std::vector<std::uint32_t> strong_components(const Digraph& g);

// Kahn order with the smallest available index first; empty if g has a cycle.
std::vector<NodeIndex> topological_order(const Digraph& g);

inline bool is_acyclic(const Digraph& g) {
  return g.num_nodes() == 0 || !topological_order(g).empty();
}

}  // namespace cascade
