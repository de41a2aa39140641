#include "cascade/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cascade/errors.hpp"
#include "cascade/random.hpp"

namespace cascade {

namespace {

constexpr std::size_t kRejectionCap = 1000;
constexpr std::size_t kProbabilityRedraws = 100;

template <class T>
const T& pick(const std::vector<T>& items, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> at(0, items.size() - 1);
  return items[at(rng)];
}

std::vector<std::vector<NodeIndex>> undirected_neighbors(const Digraph& g) {
  std::vector<std::vector<NodeIndex>> adj(g.num_nodes());
  for (const Arc& a : g.arcs()) {
    adj[a.from].push_back(a.to);
    adj[a.to].push_back(a.from);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

using Pair = std::pair<NodeIndex, NodeIndex>;

std::vector<Pair> erdos_renyi_pairs(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  std::vector<Pair> all;
  for (NodeIndex u = 0; u < n; ++u) {
    for (NodeIndex v = u + 1; v < n; ++v) all.emplace_back(u, v);
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::uniform_int_distribution<std::size_t> at(i, all.size() - 1);
    std::swap(all[i], all[at(rng)]);
  }
  all.resize(m);
  return all;
}

std::vector<Pair> preferential_pairs(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  std::set<Pair> chosen;
  std::vector<double> degree(n, 0.0);
  auto link = [&](NodeIndex u, NodeIndex v) {
    if (!chosen.insert(std::minmax(u, v)).second) return false;
    degree[u] += 1;
    degree[v] += 1;
    return true;
  };
  // Path core, then every later node attaches to existing ones with
  // probability proportional to degree + 1.
  std::size_t core = std::clamp<std::size_t>(m / n + 2, 2, n);
  for (NodeIndex v = 1; v < core && chosen.size() < m; ++v) link(v - 1, v);
  const std::size_t rest = n - core;
  const std::size_t budget = m - chosen.size();
  std::size_t carry = 0;
  for (std::size_t i = 0; i < rest; ++i) {
    auto v = static_cast<NodeIndex>(core + i);
    std::size_t want = budget * (i + 1) / rest - budget * i / rest + carry;
    std::size_t take = std::min<std::size_t>(want, v);
    carry = want - take;
    std::vector<double> weight(degree.begin(), degree.begin() + v);
    for (auto& w : weight) w += 1.0;
    for (std::size_t e = 0; e < take; ++e) {
      std::discrete_distribution<NodeIndex> target(weight.begin(), weight.end());
      NodeIndex u = target(rng);
      link(u, v);
      weight[u] = 0.0;
    }
  }
  // Top up whatever the schedule could not place.
  while (chosen.size() < m) {
    std::uniform_int_distribution<NodeIndex> any(0, static_cast<NodeIndex>(n - 1));
    NodeIndex u = any(rng), v = any(rng);
    if (u != v) link(u, v);
  }
  return {chosen.begin(), chosen.end()};
}

// Random topological order: each step takes a uniform node among those
// whose parents are all placed.
std::vector<std::size_t> random_topological_order(std::size_t n,
                                                  const std::vector<std::pair<std::size_t, std::size_t>>& arcs,
                                                  std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::size_t> indegree(n, 0);
  for (auto [u, v] : arcs) {
    children[u].push_back(v);
    ++indegree[v];
  }
  std::vector<std::size_t> ready, order;
  for (std::size_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push_back(v);
  }
  while (!ready.empty()) {
    std::uniform_int_distribution<std::size_t> at(0, ready.size() - 1);
    std::size_t i = at(rng);
    std::size_t v = ready[i];
    ready.erase(ready.begin() + static_cast<std::ptrdiff_t>(i));
    order.push_back(v);
    for (std::size_t w : children[v]) {
      if (--indegree[w] == 0) ready.push_back(w);
    }
  }
  if (order.size() != n) throw std::logic_error("random_topological_order: graph is cyclic");
  return order;
}

// Arcs of one cycle in the local graph, or empty when acyclic.
std::vector<std::size_t> find_cycle(std::size_t n,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& arcs) {
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < arcs.size(); ++i) out[arcs[i].first].push_back(i);
  std::vector<int> color(n, 0);
  std::vector<std::size_t> via(n, 0);
  std::vector<std::pair<std::size_t, std::size_t>> stack;  // (node, next out position)
  for (std::size_t s = 0; s < n; ++s) {
    if (color[s]) continue;
    color[s] = 1;
    stack.emplace_back(s, 0);
    while (!stack.empty()) {
      auto& [x, pos] = stack.back();
      if (pos == out[x].size()) {
        color[x] = 2;
        stack.pop_back();
        continue;
      }
      std::size_t arc = out[x][pos++];
      std::size_t y = arcs[arc].second;
      if (color[y] == 0) {
        color[y] = 1;
        via[y] = arc;
        stack.emplace_back(y, 0);
      } else if (color[y] == 1) {
        std::vector<std::size_t> cycle{arc};
        for (std::size_t z = arcs[arc].first; z != y; z = arcs[via[z]].first) {
          cycle.push_back(via[z]);
        }
        return cycle;
      }
    }
  }
  return {};
}

std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

}  // namespace

std::string to_string(GraphModel model) {
  return model == GraphModel::kErdosRenyi ? "erdos-renyi" : "power-law";
}

GraphModel parse_graph_model(const std::string& name) {
  if (name == "erdos-renyi" || name == "er") return GraphModel::kErdosRenyi;
  if (name == "power-law" || name == "pl") return GraphModel::kPowerLaw;
  throw InputError("unknown graph model '" + name + "' (expected erdos-renyi or power-law)");
}

void GeneratorConfig::validate() const {
  if (n < 2) throw InputError("generator: n must be at least 2");
  if (delta && !(*delta > 0.0 && *delta <= 1.0)) throw InputError("generator: delta must lie in (0,1]");
  if (!delta && !(delta_min > 0.0 && delta_min <= delta_max && delta_max <= 1.0)) {
    throw InputError("generator: need 0 < delta_min <= delta_max <= 1");
  }
  if (k == 0) throw InputError("generator: k must be at least 1");
  if (!(card_min > 0 && card_min <= card_max && card_max < n)) {
    throw InputError("generator: need 0 < card_min <= card_max < n");
  }
  if (card_overlap > card_max) throw InputError("generator: card_overlap must not exceed card_max");
  if (!(cause_min >= 0.0 && cause_min <= cause_max && cause_max <= 1.0)) {
    throw InputError("generator: need 0 <= cause_min <= cause_max <= 1");
  }
  double lo = p_min.value_or(0.5), hi = p_max.value_or(0.5);
  if (p_min.has_value() != p_max.has_value() || !(lo > 0.0 && lo <= hi && hi < 1.0)) {
    throw InputError("generator: p_min and p_max must be given together with 0 < p_min <= p_max < 1");
  }
  if (observations < k) throw InputError("generator: need at least one trace per group");
  if (!(noise >= 0.0 && noise < 1.0)) throw InputError("generator: noise must lie in [0,1)");
  if (!(root_activation > 0.0 && root_activation < 1.0)) {
    throw InputError("generator: root_activation must lie in (0,1)");
  }
}

std::vector<Arc> GroundTruth::true_arcs() const {
  std::vector<Arc> out;
  for (const auto& dag : causal) {
    for (const auto& a : dag) out.push_back({a.from, a.to});
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SocialGraph gen_social_graph(const GeneratorConfig& config, double delta, std::mt19937_64& rng) {
  const std::size_t n = config.n;
  const auto m = static_cast<std::size_t>(std::llround(delta * static_cast<double>(pair_count(n))));
  if (m == 0 || m > pair_count(n)) {
    throw InputError("generator: density " + std::to_string(delta) + " gives " +
                     std::to_string(m) + " edges on " + std::to_string(n) + " nodes");
  }
  auto pairs = config.model == GraphModel::kErdosRenyi ? erdos_renyi_pairs(n, m, rng)
                                                       : preferential_pairs(n, m, rng);
  std::vector<Arc> arcs;
  std::bernoulli_distribution flip(0.5);
  for (auto [u, v] : pairs) {
    if (config.symmetric) {
      arcs.push_back({u, v});
      arcs.push_back({v, u});
    } else if (flip(rng)) {
      arcs.push_back({v, u});
    } else {
      arcs.push_back({u, v});
    }
  }
  SocialGraph g;
  for (std::size_t i = 0; i < n; ++i) g.nodes.intern("v" + std::to_string(i + 1));
  g.arcs = Digraph(n, std::move(arcs));
  return g;
}

std::vector<std::vector<NodeIndex>> gen_groups(const Digraph& graph, const GeneratorConfig& config,
                                               std::mt19937_64& rng) {
  const auto adj = undirected_neighbors(graph);
  std::vector<std::uint32_t> covered(graph.num_nodes(), 0);
  std::vector<std::vector<NodeIndex>> groups;
  std::uniform_int_distribution<std::size_t> size(config.card_min, config.card_max);
  std::size_t attempts = 0;

  while (groups.size() < config.k) {
    if (++attempts > kRejectionCap) {
      throw InfeasibleError("generator: could not place " + std::to_string(config.k) +
                            " connected groups within the size and overlap bounds; loosen them "
                            "or raise the density");
    }
    const std::size_t target = size(rng);
    std::vector<NodeIndex> fresh, all;
    for (NodeIndex v = 0; v < graph.num_nodes(); ++v) {
      if (adj[v].empty()) continue;
      all.push_back(v);
      if (!covered[v]) fresh.push_back(v);
    }
    if (all.empty()) throw InfeasibleError("generator: social graph has no edges");
    std::set<NodeIndex> members{fresh.empty() ? pick(all, rng) : pick(fresh, rng)};
    while (members.size() < target) {
      std::set<NodeIndex> frontier;
      for (NodeIndex v : members) {
        for (NodeIndex w : adj[v]) {
          if (!members.count(w)) frontier.insert(w);
        }
      }
      if (frontier.empty()) break;
      std::vector<NodeIndex> any(frontier.begin(), frontier.end()), uncovered;
      for (NodeIndex w : any) {
        if (!covered[w]) uncovered.push_back(w);
      }
      members.insert(uncovered.empty() ? pick(any, rng) : pick(uncovered, rng));
    }
    if (members.size() < target) continue;
    std::vector<NodeIndex> group(members.begin(), members.end());
    bool overlap_ok = std::all_of(groups.begin(), groups.end(), [&](const auto& other) {
      std::vector<NodeIndex> common;
      std::set_intersection(group.begin(), group.end(), other.begin(), other.end(),
                            std::back_inserter(common));
      return common.size() <= config.card_overlap;
    });
    if (!overlap_ok) continue;
    for (NodeIndex v : group) ++covered[v];
    groups.push_back(std::move(group));
  }
  return groups;
}

std::vector<CausalArc> gen_causal_dag(const Digraph& graph, const std::vector<NodeIndex>& group,
                                      double density, double p_min, double p_max,
                                      std::mt19937_64& rng) {
  auto local = [&](NodeIndex v) {
    return static_cast<std::size_t>(std::lower_bound(group.begin(), group.end(), v) - group.begin());
  };
  std::vector<std::pair<std::size_t, std::size_t>> arcs;
  for (NodeIndex u : group) {
    for (NodeIndex w : graph.out(u)) {
      if (std::binary_search(group.begin(), group.end(), w)) arcs.emplace_back(local(u), local(w));
    }
  }
  const std::size_t induced = arcs.size();
  while (true) {
    auto cycle = find_cycle(group.size(), arcs);
    if (cycle.empty()) break;
    arcs.erase(arcs.begin() + static_cast<std::ptrdiff_t>(pick(cycle, rng)));
  }
  const auto target = static_cast<std::size_t>(std::llround(density * static_cast<double>(induced)));
  while (arcs.size() > target) {
    std::uniform_int_distribution<std::size_t> at(0, arcs.size() - 1);
    arcs.erase(arcs.begin() + static_cast<std::ptrdiff_t>(at(rng)));
  }
  std::sort(arcs.begin(), arcs.end());
  std::uniform_real_distribution<double> prob(p_min, p_max);
  std::vector<CausalArc> out;
  for (auto [u, w] : arcs) out.push_back({group[u], group[w], prob(rng)});
  return out;
}

Traces sample_traces(const std::vector<std::vector<NodeIndex>>& groups,
                     const std::vector<std::vector<CausalArc>>& causal,
                     const GeneratorConfig& config, std::mt19937_64& rng) {
  const double mean = static_cast<double>(config.observations) / static_cast<double>(config.k);
  const auto lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.5 * mean)));
  const auto hi = std::max(lo, static_cast<std::size_t>(std::floor(1.5 * mean)));
  std::uniform_int_distribution<std::size_t> count(lo, hi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Traces out;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& group = groups[gi];
    const std::size_t n = group.size();
    auto local = [&](NodeIndex v) {
      return static_cast<std::size_t>(std::lower_bound(group.begin(), group.end(), v) -
                                      group.begin());
    };
    std::vector<std::pair<std::size_t, std::size_t>> arcs;
    std::vector<std::vector<std::pair<std::size_t, double>>> parents(n);
    for (const auto& a : causal[gi]) {
      arcs.emplace_back(local(a.from), local(a.to));
      parents[local(a.to)].emplace_back(local(a.from), a.p);
    }
    // One total order per group: every trace of the group is timed along it.
    const auto order = random_topological_order(n, arcs, rng);
    const std::size_t traces = count(rng);

    std::vector<std::vector<char>> batch;
    bool feasible = false;
    for (std::size_t attempt = 0; attempt < kRejectionCap && !feasible; ++attempt) {
      batch.assign(traces, std::vector<char>(n, 0));
      std::vector<std::size_t> active_count(n, 0);
      for (auto& state : batch) {
        bool any = false;
        for (std::size_t tries = 0; !any && tries < kRejectionCap; ++tries) {
          std::fill(state.begin(), state.end(), 0);
          for (std::size_t v : order) {
            double p_on;
            if (parents[v].empty()) {
              p_on = config.root_activation;
            } else {
              double off = 1.0;
              for (auto [u, p] : parents[v]) {
                if (state[u]) off *= 1.0 - p;
              }
              p_on = 1.0 - off;
            }
            state[v] = unit(rng) < p_on;
            any = any || state[v];
          }
        }
        for (std::size_t v = 0; v < n; ++v) active_count[v] += state[v];
      }
      feasible = std::all_of(active_count.begin(), active_count.end(),
                             [&](std::size_t c) { return c > 0 && c < traces; });
    }
    if (!feasible) {
      throw InfeasibleError("generator: group " + std::to_string(gi) +
                            " cannot make every node both act and miss an item");
    }
    for (const auto& state : batch) {
      std::vector<Activation> trace;
      Timestamp t = 0;
      for (std::size_t v : order) {
        if (state[v]) trace.push_back({group[v], ++t});
      }
      out.traces.push_back(std::move(trace));
      out.labels.push_back(gi);
    }
  }
  // Hide the generation order from downstream consumers.
  std::vector<std::size_t> perm(out.traces.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Traces shuffled;
  for (std::size_t i : perm) {
    shuffled.traces.push_back(std::move(out.traces[i]));
    shuffled.labels.push_back(out.labels[i]);
  }
  return shuffled;
}

std::size_t inject_noise(Traces& traces, const std::vector<std::vector<NodeIndex>>& groups,
                         double noise, std::mt19937_64& rng, std::vector<std::string>* warnings) {
  if (noise <= 0.0) return 0;
  std::bernoulli_distribution corrupt(noise), coin(0.5);
  std::size_t corrupted = 0;
  Traces kept;
  for (std::size_t i = 0; i < traces.traces.size(); ++i) {
    const auto& group = groups[traces.labels[i]];
    std::vector<NodeIndex> sequence;
    std::size_t inserts = 0;
    for (const Activation& a : traces.traces[i]) {
      if (!corrupt(rng)) {
        sequence.push_back(a.node);
      } else if (coin(rng)) {
        ++corrupted;  // deleted
      } else {
        sequence.push_back(a.node);
        ++inserts;
      }
    }
    for (std::size_t j = 0; j < inserts; ++j) {
      std::vector<NodeIndex> absent;
      for (NodeIndex v : group) {
        if (std::find(sequence.begin(), sequence.end(), v) == sequence.end()) absent.push_back(v);
      }
      if (absent.empty()) break;
      std::uniform_int_distribution<std::size_t> slot(0, sequence.size());
      sequence.insert(sequence.begin() + static_cast<std::ptrdiff_t>(slot(rng)), pick(absent, rng));
      ++corrupted;
    }
    if (sequence.empty()) {
      if (warnings) warnings->push_back("noise emptied trace " + std::to_string(i) + "; dropped");
      continue;
    }
    std::vector<Activation> trace;
    Timestamp t = 0;
    for (NodeIndex v : sequence) trace.push_back({v, ++t});
    kept.traces.push_back(std::move(trace));
    kept.labels.push_back(traces.labels[i]);
  }
  traces = std::move(kept);
  return corrupted;
}

GroundTruth generate(const GeneratorConfig& config) {
  config.validate();
  GroundTruth gt;
  gt.config = config;

  auto params_rng = child_rng(config.seed, 0);
  auto graph_rng = child_rng(config.seed, 1);
  auto group_rng = child_rng(config.seed, 2);
  auto causal_rng = child_rng(config.seed, 3);
  auto trace_rng = child_rng(config.seed, 4);
  auto noise_rng = child_rng(config.seed, 5);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  gt.delta = config.delta ? *config.delta
                          : std::uniform_real_distribution<double>(config.delta_min,
                                                                   config.delta_max)(params_rng);
  gt.graph = gen_social_graph(config, gt.delta, graph_rng);
  gt.groups = gen_groups(gt.graph.arcs, config, group_rng);

  Traces traces;
  for (std::size_t redraw = 0;; ++redraw) {
    if (config.p_min) {
      gt.p_min = *config.p_min;
      gt.p_max = *config.p_max;
    } else {
      double a = 0.0, b = 0.0;
      while (a <= 0.0 || b <= 0.0) {
        a = unit(params_rng);
        b = unit(params_rng);
      }
      gt.p_min = std::min(a, b);
      gt.p_max = std::max(a, b);
    }
    gt.causal.clear();
    gt.cause_density.clear();
    std::uniform_real_distribution<double> density(config.cause_min, config.cause_max);
    for (const auto& group : gt.groups) {
      gt.causal.push_back(gen_causal_dag(gt.graph.arcs, group, density(causal_rng), gt.p_min,
                                         gt.p_max, causal_rng));
      std::size_t induced = 0;
      for (NodeIndex u : group) {
        for (NodeIndex w : gt.graph.arcs.out(u)) induced += std::binary_search(group.begin(), group.end(), w);
      }
      gt.cause_density.push_back(induced ? static_cast<double>(gt.causal.back().size()) /
                                               static_cast<double>(induced)
                                         : 0.0);
    }
    try {
      traces = sample_traces(gt.groups, gt.causal, config, trace_rng);
      break;
    } catch (const InfeasibleError&) {
      // Arc probabilities too weak to reach every node: redraw them unless fixed.
      if (config.p_min || redraw + 1 >= kProbabilityRedraws) throw;
      gt.warnings.push_back("redrew arc probabilities: some node never acted");
    }
  }
  gt.corrupted = inject_noise(traces, gt.groups, config.noise, noise_rng, &gt.warnings);

  Interner entities;
  for (std::size_t i = 0; i < traces.traces.size(); ++i) entities.intern("e" + std::to_string(i + 1));
  gt.db = build_db(gt.graph.arcs, std::move(entities), traces.traces);
  gt.labels = std::move(traces.labels);
  return gt;
}

}  // namespace cascade
