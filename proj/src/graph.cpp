#include "cascade/graph.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace cascade {

Digraph::Digraph(std::size_t num_nodes) : Digraph(num_nodes, {}) {}

Digraph::Digraph(std::size_t num_nodes, std::vector<Arc> arcs)
    : num_nodes_(num_nodes), arcs_(std::move(arcs)) {
  for (const Arc& a : arcs_) {
    if (a.from >= num_nodes_ || a.to >= num_nodes_) {
      throw std::out_of_range("Digraph: arc endpoint out of range");
    }
    if (a.from == a.to) {
      throw std::invalid_argument("Digraph: self-loops are not allowed");
    }
  }
  std::sort(arcs_.begin(), arcs_.end());
  arcs_.erase(std::unique(arcs_.begin(), arcs_.end()), arcs_.end());

  out_offsets_.assign(num_nodes_ + 1, 0);
  in_offsets_.assign(num_nodes_ + 1, 0);
  for (const Arc& a : arcs_) {
    ++out_offsets_[a.from + 1];
    ++in_offsets_[a.to + 1];
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(), out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());

  // arcs_ is sorted by (from, to), so out lists come out sorted.
  out_targets_.resize(arcs_.size());
  in_sources_.resize(arcs_.size());
  std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
  for (std::size_t i = 0; i < arcs_.size(); ++i) {
    out_targets_[i] = arcs_[i].to;
    in_sources_[in_fill[arcs_[i].to]++] = arcs_[i].from;
  }
}

bool Digraph::has_arc(NodeIndex u, NodeIndex v) const {
  auto targets = out(u);
  return std::binary_search(targets.begin(), targets.end(), v);
}

std::vector<std::uint32_t> weak_components(const Digraph& g) {
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> label(g.num_nodes(), kUnset);
  std::vector<NodeIndex> stack;
  std::uint32_t next = 0;
  for (NodeIndex s = 0; s < g.num_nodes(); ++s) {
    if (label[s] != kUnset) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeIndex u = stack.back();
      stack.pop_back();
      auto visit = [&](NodeIndex w) {
        if (label[w] == kUnset) {
          label[w] = next;
          stack.push_back(w);
        }
      };
      for (NodeIndex w : g.out(u)) visit(w);
      for (NodeIndex w : g.in(u)) visit(w);
    }
    ++next;
  }
  return label;
}

bool is_weakly_connected(const Digraph& g) {
  if (g.num_nodes() == 0) return false;
  auto label = weak_components(g);
  return std::all_of(label.begin(), label.end(), [](auto l) { return l == 0; });
}

std::vector<std::uint32_t> strong_components(const Digraph& g) {
  const std::size_t n = g.num_nodes();
  constexpr auto kUnset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<NodeIndex> tarjan_stack;
  std::vector<bool> on_stack(n, false);
  // (node, position in its out list)
  std::vector<std::pair<NodeIndex, std::size_t>> call_stack;
  std::uint32_t counter = 0, next_comp = 0;

  for (NodeIndex root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    call_stack.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    tarjan_stack.push_back(root);
    on_stack[root] = true;
    while (!call_stack.empty()) {
      auto& [u, pos] = call_stack.back();
      auto succ = g.out(u);
      if (pos < succ.size()) {
        NodeIndex w = succ[pos++];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          tarjan_stack.push_back(w);
          on_stack[w] = true;
          call_stack.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[u] = std::min(low[u], index[w]);
        }
        continue;
      }
      if (low[u] == index[u]) {
        NodeIndex w;
        do {
          w = tarjan_stack.back();
          tarjan_stack.pop_back();
          on_stack[w] = false;
          comp[w] = next_comp;
        } while (w != u);
        ++next_comp;
      }
      NodeIndex finished = u;
      call_stack.pop_back();
      if (!call_stack.empty()) {
        NodeIndex parent = call_stack.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  return comp;
}

std::vector<NodeIndex> topological_order(const Digraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<std::size_t> indegree(n);
  for (NodeIndex v = 0; v < n; ++v) indegree[v] = g.in(v).size();
  std::priority_queue<NodeIndex, std::vector<NodeIndex>, std::greater<>> ready;
  for (NodeIndex v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<NodeIndex> order;
  order.reserve(n);
  while (!ready.empty()) {
    NodeIndex u = ready.top();
    ready.pop();
    order.push_back(u);
    for (NodeIndex w : g.out(u)) {
      if (--indegree[w] == 0) ready.push(w);
    }
  }
  if (order.size() != n) order.clear();
  return order;
}

}  // namespace cascade
