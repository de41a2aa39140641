#include "cascade/agony.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <stdexcept>

namespace cascade {

namespace {

using Clock = std::chrono::steady_clock;
constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Maximum Eulerian subgraph of a graph given as an arc list over nodes
// 0..n-1, as a unit-capacity circulation. Starts from the all-ones flow and
// cancels the node imbalance along cheapest residual paths. A residual edge
// either undoes a flowing arc (cost +1) or re-adds an idle one (cost -1).
class EulerianSubgraph {
 public:
  EulerianSubgraph(std::size_t n, std::span<const Arc> arcs)
      : n_(n), arcs_(arcs), flow_(arcs.size(), 1), incident_(n), excess_(n, 0) {
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
      incident_[arcs_[i].from].push_back(i);
      incident_[arcs_[i].to].push_back(i);
      ++excess_[arcs_[i].to];
      --excess_[arcs_[i].from];
    }
  }

  // false if the deadline passed before optimality.
  bool solve(std::optional<Clock::time_point> deadline) {
    std::vector<std::int64_t> potential(n_, 0), dist(n_);
    std::vector<std::size_t> via(n_);
    using Entry = std::pair<std::int64_t, NodeIndex>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

    while (std::any_of(excess_.begin(), excess_.end(), [](auto e) { return e > 0; })) {
      if (deadline && Clock::now() > *deadline) return false;
      std::fill(dist.begin(), dist.end(), kInf);
      for (NodeIndex x = 0; x < n_; ++x) {
        if (excess_[x] > 0) {
          dist[x] = 0;
          heap.emplace(0, x);
        }
      }
      while (!heap.empty()) {
        auto [d, x] = heap.top();
        heap.pop();
        if (d != dist[x]) continue;
        for (std::size_t i : incident_[x]) {
          NodeIndex y;
          std::int64_t cost;
          if (arcs_[i].to == x && flow_[i]) {
            y = arcs_[i].from;
            cost = 1;
          } else if (arcs_[i].from == x && !flow_[i]) {
            y = arcs_[i].to;
            cost = -1;
          } else {
            continue;
          }
          std::int64_t nd = d + cost + potential[x] - potential[y];
          if (nd < dist[y]) {
            dist[y] = nd;
            via[y] = i;
            heap.emplace(nd, y);
          }
        }
      }

      NodeIndex target = 0;
      std::int64_t best = kInf;
      for (NodeIndex x = 0; x < n_; ++x) {
        if (excess_[x] < 0 && dist[x] < best) {
          best = dist[x];
          target = x;
        }
      }
      if (best == kInf) throw std::logic_error("agony: residual graph lost feasibility");
      for (NodeIndex x = 0; x < n_; ++x) potential[x] += std::min(dist[x], best);

      ++excess_[target];
      NodeIndex x = target;
      while (dist[x] != 0 || excess_[x] <= 0) {
        std::size_t i = via[x];
        flow_[i] ^= 1;
        x = (arcs_[i].to == x) ? arcs_[i].from : arcs_[i].to;
      }
      --excess_[x];
    }
    return true;
  }

  const std::vector<char>& flow() const { return flow_; }

  std::int64_t value() const {
    return std::count(flow_.begin(), flow_.end(), char{1});
  }

 private:
  std::size_t n_;
  std::span<const Arc> arcs_;
  std::vector<char> flow_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<std::int64_t> excess_;
};

// Arc lists of the non-trivial strong components, re-indexed locally.
struct Component {
  std::vector<NodeIndex> nodes;
  std::vector<Arc> local_arcs;
  std::vector<std::size_t> arc_ids;  // positions in g.arcs()
};

std::vector<Component> cyclic_components(const Digraph& g) {
  auto label = strong_components(g);
  std::uint32_t count = 0;
  for (auto l : label) count = std::max(count, l + 1);
  std::vector<Component> comps(count);
  std::vector<NodeIndex> local(g.num_nodes());
  for (NodeIndex v = 0; v < g.num_nodes(); ++v) {
    local[v] = static_cast<NodeIndex>(comps[label[v]].nodes.size());
    comps[label[v]].nodes.push_back(v);
  }
  const auto& arcs = g.arcs();
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    auto c = label[arcs[i].from];
    if (c != label[arcs[i].to]) continue;
    comps[c].local_arcs.push_back({local[arcs[i].from], local[arcs[i].to]});
    comps[c].arc_ids.push_back(i);
  }
  std::erase_if(comps, [](const Component& c) { return c.local_arcs.empty(); });
  return comps;
}

// Greedy Eades-Lin-Smyth ordering, then longest-path layering over the arcs
// that agree with the order. Feasible, not optimal.
Ranking heuristic_ranking(const Digraph& g) {
  const std::size_t n = g.num_nodes();
  std::vector<bool> removed(n, false);
  std::vector<std::int64_t> indeg(n), outdeg(n);
  for (NodeIndex v = 0; v < n; ++v) {
    indeg[v] = static_cast<std::int64_t>(g.in(v).size());
    outdeg[v] = static_cast<std::int64_t>(g.out(v).size());
  }
  std::vector<NodeIndex> head, tail;
  auto remove = [&](NodeIndex v) {
    removed[v] = true;
    for (NodeIndex w : g.out(v)) --indeg[w];
    for (NodeIndex w : g.in(v)) --outdeg[w];
  };
  std::size_t left = n;
  while (left > 0) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (NodeIndex v = 0; v < n; ++v) {
        if (removed[v]) continue;
        if (outdeg[v] == 0) {
          tail.push_back(v);
          remove(v);
          --left;
          changed = true;
        } else if (indeg[v] == 0) {
          head.push_back(v);
          remove(v);
          --left;
          changed = true;
        }
      }
    }
    if (left == 0) break;
    NodeIndex pick = 0;
    std::int64_t best = std::numeric_limits<std::int64_t>::min();
    for (NodeIndex v = 0; v < n; ++v) {
      if (!removed[v] && outdeg[v] - indeg[v] > best) {
        best = outdeg[v] - indeg[v];
        pick = v;
      }
    }
    head.push_back(pick);
    remove(pick);
    --left;
  }
  head.insert(head.end(), tail.rbegin(), tail.rend());

  std::vector<std::size_t> position(n);
  for (std::size_t i = 0; i < n; ++i) position[head[i]] = i;
  Ranking rank(n, 0);
  for (NodeIndex v : head) {
    for (NodeIndex u : g.in(v)) {
      if (position[u] < position[v]) rank[v] = std::max(rank[v], rank[u] + 1);
    }
  }
  return canonicalize(rank);
}

// Shortest residual distances from a virtual source; no negative cycles exist
// once the flow is optimal. FIFO label correcting.
std::vector<std::int64_t> residual_distances(const Digraph& g,
                                             const std::vector<char>& flow) {
  const std::size_t n = g.num_nodes();
  const auto& arcs = g.arcs();
  std::vector<std::vector<std::pair<NodeIndex, std::int64_t>>> adj(n);
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    if (flow[i]) {
      adj[arcs[i].to].emplace_back(arcs[i].from, 1);
    } else {
      adj[arcs[i].from].emplace_back(arcs[i].to, -1);
    }
  }
  std::vector<std::int64_t> dist(n, 0);
  std::vector<char> queued(n, 1);
  std::deque<NodeIndex> queue;
  for (NodeIndex v = 0; v < n; ++v) queue.push_back(v);
  while (!queue.empty()) {
    NodeIndex x = queue.front();
    queue.pop_front();
    queued[x] = 0;
    for (auto [y, c] : adj[x]) {
      if (dist[x] + c < dist[y]) {
        dist[y] = dist[x] + c;
        if (!queued[y]) {
          queued[y] = 1;
          queue.push_back(y);
        }
      }
    }
  }
  return dist;
}

}  // namespace

std::int64_t agony_of_ranking(const Digraph& g, std::span<const std::int64_t> ranking) {
  if (ranking.size() != g.num_nodes()) {
    throw std::invalid_argument("agony_of_ranking: ranking does not cover every node");
  }
  std::int64_t total = 0;
  for (const Arc& a : g.arcs()) {
    total += std::max<std::int64_t>(ranking[a.from] - ranking[a.to] + 1, 0);
  }
  return total;
}

Ranking canonicalize(std::span<const std::int64_t> ranking) {
  std::vector<std::int64_t> levels(ranking.begin(), ranking.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  Ranking out(ranking.size());
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    out[i] = std::lower_bound(levels.begin(), levels.end(), ranking[i]) - levels.begin();
  }
  return out;
}

AgonyResult min_agony(const Digraph& g, const AgonyOptions& options) {
  std::optional<Clock::time_point> deadline;
  if (options.time_budget) deadline = Clock::now() + *options.time_budget;

  std::vector<char> flow(g.num_arcs(), 0);
  std::int64_t value = 0;
  for (const Component& c : cyclic_components(g)) {
    EulerianSubgraph solver(c.nodes.size(), c.local_arcs);
    if (!solver.solve(deadline)) {
      AgonyResult bound;
      bound.ranking = heuristic_ranking(g);
      bound.agony = agony_of_ranking(g, bound.ranking);
      bound.exact = false;
      return bound;
    }
    const auto& local_flow = solver.flow();
    for (std::size_t j = 0; j < c.arc_ids.size(); ++j) flow[c.arc_ids[j]] = local_flow[j];
    value += solver.value();
  }

  auto dist = residual_distances(g, flow);
  Ranking rank(g.num_nodes());
  for (std::size_t v = 0; v < rank.size(); ++v) rank[v] = -dist[v];

  AgonyResult result;
  result.ranking = canonicalize(rank);
  result.agony = value;
  if (agony_of_ranking(g, result.ranking) != value) {
    throw std::logic_error("min_agony: ranking does not certify the flow value");
  }
  return result;
}

std::int64_t min_agony_value(const Digraph& g, std::int64_t stop_above) {
  std::int64_t total = 0;
  for (const Component& c : cyclic_components(g)) {
    EulerianSubgraph solver(c.nodes.size(), c.local_arcs);
    solver.solve(std::nullopt);
    total += solver.value();
    if (total > stop_above) break;
  }
  return total;
}

AgonyResult min_agony_bruteforce(const Digraph& g) {
  const std::size_t n = g.num_nodes();
  if (n > kBruteForceMaxNodes) {
    throw std::invalid_argument("min_agony_bruteforce: too many nodes");
  }
  AgonyResult best;
  best.agony = std::numeric_limits<std::int64_t>::max();
  Ranking rank(n, 0);
  while (true) {
    std::int64_t a = agony_of_ranking(g, rank);
    if (a < best.agony) {
      best.agony = a;
      best.ranking = rank;
    }
    // Odometer with the last node as the fastest digit.
    std::size_t pos = n;
    while (pos > 0 && rank[pos - 1] == static_cast<std::int64_t>(n) - 1) {
      rank[--pos] = 0;
    }
    if (pos == 0) break;
    ++rank[pos - 1];
  }
  if (n == 0) best.agony = 0;
  return best;
}

}  // namespace cascade
