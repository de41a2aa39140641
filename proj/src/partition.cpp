#include "cascade/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

struct DisjointSets {
  explicit DisjointSets(std::size_t n = 0) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  std::size_t add() {
    parent.push_back(parent.size());
    return parent.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
  std::vector<std::size_t> parent;
};

std::uint64_t arc_key(NodeIndex u, NodeIndex v) {
  return (static_cast<std::uint64_t>(u) << 32) | v;
}

std::size_t node_space(const PropagationDb& db) {
  std::size_t n = 0;
  for (const auto& dag : db.dags) {
    for (const auto& a : dag.activations) n = std::max<std::size_t>(n, a.node + 1);
  }
  return n;
}

// Weak components of each dag as lists of global nodes.
using DagComponents = std::vector<std::vector<NodeIndex>>;

DagComponents dag_components(const PropagationDag& dag) {
  auto nodes = dag.nodes();
  DisjointSets sets(nodes.size());
  auto pos = [&](NodeIndex g) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), g) -
                                    nodes.begin());
  };
  for (const Arc& a : dag.arcs) sets.unite(pos(a.from), pos(a.to));
  std::map<std::size_t, std::vector<NodeIndex>> by_root;
  for (std::size_t i = 0; i < nodes.size(); ++i) by_root[sets.find(i)].push_back(nodes[i]);
  DagComponents out;
  for (auto& [root, members] : by_root) out.push_back(std::move(members));
  return out;
}

struct SamplingContext {
  const PropagationDb& db;
  const PartitionParams& params;
  std::size_t nodes = 0;
  std::vector<DagComponents> components;

  SamplingContext(const PropagationDb& d, const PartitionParams& p)
      : db(d), params(p), nodes(node_space(d)) {
    components.reserve(d.size());
    for (const auto& dag : d.dags) components.push_back(dag_components(dag));
  }
};

// Union graph of the dag set being grown, with enough bookkeeping to answer
// "still connected?" and "agony if D joins?" without rebuilding from scratch.
class GrowingUnion {
 public:
  explicit GrowingUnion(const SamplingContext& ctx)
      : ctx_(ctx), local_(ctx.nodes, kAbsent) {}

  bool empty() const { return members_ == 0; }

  bool connected_with(EntityIndex e) {
    const auto& comps = ctx_.components[e];
    if (empty()) return comps.size() == 1;
    DisjointSets merged(component_count_ + comps.size());
    for (std::size_t j = 0; j < comps.size(); ++j) {
      for (NodeIndex g : comps[j]) {
        if (local_[g] != kAbsent) {
          merged.unite(component_count_ + j, label_[local_[g]]);
        }
      }
    }
    std::size_t roots = 0;
    for (std::size_t i = 0; i < merged.parent.size(); ++i) roots += merged.find(i) == i;
    return roots == 1;
  }

  std::int64_t agony_with(EntityIndex e) const {
    const auto& dag = ctx_.db.dags[e];
    std::vector<Arc> added;
    bool touches = false;
    for (const Arc& a : dag.arcs) {
      bool from_in = local_[a.from] != kAbsent, to_in = local_[a.to] != kAbsent;
      touches = touches || from_in || to_in;
      if (from_in && to_in && arc_set_.count(arc_key(a.from, a.to))) continue;
      added.push_back(a);
    }
    if (added.empty()) return agony_;
    if (!touches && ctx_.params.expedients.skip_disjoint_agony) return agony_;

    std::vector<NodeIndex> extra;
    auto local_of = [&](NodeIndex g) -> NodeIndex {
      if (local_[g] != kAbsent) return local_[g];
      auto it = std::find(extra.begin(), extra.end(), g);
      if (it == extra.end()) {
        extra.push_back(g);
        it = extra.end() - 1;
      }
      return static_cast<NodeIndex>(nodes_.size() + (it - extra.begin()));
    };
    std::vector<Arc> arcs = arcs_;
    for (const Arc& a : added) arcs.push_back({local_of(a.from), local_of(a.to)});
    Digraph g(nodes_.size() + extra.size(), std::move(arcs));
    const auto& budget = ctx_.params.expedients.agony_budget;
    if (budget) return min_agony(g, {budget}).agony;
    return min_agony_value(g, ctx_.params.eta);
  }

  void add(EntityIndex e, std::int64_t agony) {
    const auto& dag = ctx_.db.dags[e];
    for (const auto& act : dag.activations) {
      if (local_[act.node] == kAbsent) {
        local_[act.node] = static_cast<NodeIndex>(nodes_.size());
        nodes_.push_back(act.node);
        sets_.add();
      }
    }
    for (const Arc& a : dag.arcs) {
      if (arc_set_.insert(arc_key(a.from, a.to)).second) {
        arcs_.push_back({local_[a.from], local_[a.to]});
        sets_.unite(local_[a.from], local_[a.to]);
      }
    }
    agony_ = agony;
    ++members_;
    // dense component labels
    label_.assign(nodes_.size(), 0);
    std::map<std::size_t, std::size_t> dense;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      auto root = sets_.find(i);
      auto [it, inserted] = dense.try_emplace(root, dense.size());
      label_[i] = it->second;
    }
    component_count_ = dense.size();
  }

 private:
  static constexpr NodeIndex kAbsent = static_cast<NodeIndex>(-1);

  const SamplingContext& ctx_;
  std::vector<NodeIndex> local_;  // global -> local
  std::vector<NodeIndex> nodes_;  // local -> global
  std::vector<Arc> arcs_;         // local indices
  std::unordered_set<std::uint64_t> arc_set_;  // global keys
  DisjointSets sets_;
  std::vector<std::size_t> label_;
  std::size_t component_count_ = 0;
  std::size_t members_ = 0;
  std::int64_t agony_ = 0;
};

std::vector<EntityIndex> sample_maximal(const SamplingContext& ctx,
                                        std::span<const EntityIndex> uncovered,
                                        std::mt19937_64& rng) {
  const std::size_t target = std::min(ctx.params.max_size, uncovered.size());
  std::vector<EntityIndex> pool(uncovered.begin(), uncovered.end());
  std::vector<EntityIndex> chosen;
  GrowingUnion current(ctx);

  while (chosen.size() < target && !pool.empty()) {
    // Scanning a uniform permutation and stopping at the first admissible
    // dag picks uniformly among the admissible ones. Agony violators found
    // on the way are dropped for good; disconnected ones stay in the pool.
    std::shuffle(pool.begin(), pool.end(), rng);
    std::optional<std::size_t> picked;
    std::int64_t picked_agony = 0;
    std::vector<char> discard(pool.size(), 0);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      EntityIndex e = pool[i];
      if (current.empty()) {
        picked = i;
        break;
      }
      if (!current.connected_with(e)) continue;
      std::int64_t a = current.agony_with(e);
      if (a > ctx.params.eta) {
        discard[i] = 1;
        continue;
      }
      picked = i;
      picked_agony = a;
      break;
    }
    std::vector<EntityIndex> rest;
    rest.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!discard[i] && (!picked || i != *picked)) rest.push_back(pool[i]);
    }
    if (!picked) break;
    chosen.push_back(pool[*picked]);
    current.add(pool[*picked], picked_agony);
    pool = std::move(rest);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::size_t acceptance_threshold(double alpha, std::size_t max_size, std::size_t uncovered) {
  double raw = alpha * static_cast<double>(std::min(max_size, uncovered));
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

}  // namespace

void PartitionParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in (0, 1]");
  if (max_size == 0) throw InputError("max size K must be at least 1");
  if (eta < 0) throw InputError("eta must be non-negative");
}

std::size_t PartitionParams::retry_cap() const {
  if (expedients.max_retries) return *expedients.max_retries;
  return 10 * static_cast<std::size_t>(std::ceil(1.0 / alpha - 1e-9));
}

std::string to_string(PartitionAlgorithm algorithm) {
  return algorithm == PartitionAlgorithm::kTwoStep ? "two-step" : "sampling";
}

PartitionAlgorithm parse_algorithm(const std::string& name) {
  if (name == "two-step") return PartitionAlgorithm::kTwoStep;
  if (name == "sampling") return PartitionAlgorithm::kSampling;
  throw InputError("unknown partition algorithm '" + name + "'");
}

bool is_valid_group(const PropagationDb& db, std::span<const EntityIndex> group,
                    const PartitionParams& params) {
  if (group.empty()) throw std::invalid_argument("is_valid_group: empty group");
  if (group.size() > params.max_size) return false;
  auto u = union_graph(db, group);
  if (group.size() > 1 && !is_weakly_connected(u)) return false;
  return min_agony_value(u.graph, params.eta) <= params.eta;
}

Group make_group(const PropagationDb& db, std::vector<EntityIndex> members,
                 const PartitionParams& params) {
  Group g;
  std::sort(members.begin(), members.end());
  auto u = union_graph(db, members);
  AgonyResult agony = min_agony(u.graph, {params.expedients.agony_budget});
  if (!agony.exact && agony.agony > params.eta) agony = min_agony(u.graph);
  g.members = std::move(members);
  g.nodes = u.nodes;
  g.agony = agony.agony;
  g.exact = agony.exact;
  g.ranking = std::move(agony.ranking);
  g.connected = is_weakly_connected(u);
  return g;
}

std::vector<std::vector<EntityIndex>> mine_valid_dag_sets(const PropagationDb& db,
                                                          const PartitionParams& params) {
  params.validate();
  if (db.size() > params.mine_guard) {
    throw InfeasibleError("two-step mining refuses " + std::to_string(db.size()) +
                          " dags (guard " + std::to_string(params.mine_guard) +
                          "); use the sampling algorithm");
  }
  using Set = std::vector<EntityIndex>;
  std::vector<Set> agony_ok;  // all sizes, monotone property only
  std::vector<Set> level;
  for (EntityIndex e = 0; e < db.size(); ++e) level.push_back({e});

  std::size_t size = 1;
  while (!level.empty()) {
    agony_ok.insert(agony_ok.end(), level.begin(), level.end());
    if (size == params.max_size) break;
    std::set<Set> known(level.begin(), level.end());
    std::vector<Set> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        // level is sorted, so joinable pairs are contiguous in j
        if (!std::equal(level[i].begin(), level[i].end() - 1, level[j].begin())) break;
        Set cand = level[i];
        cand.push_back(level[j].back());
        bool closed = true;
        for (std::size_t drop = 0; drop + 2 < cand.size() && closed; ++drop) {
          Set sub;
          for (std::size_t k = 0; k < cand.size(); ++k) {
            if (k != drop) sub.push_back(cand[k]);
          }
          closed = known.count(sub) > 0;
        }
        if (!closed) continue;
        auto u = union_graph(db, cand);
        if (min_agony_value(u.graph, params.eta) <= params.eta) next.push_back(std::move(cand));
      }
    }
    std::sort(next.begin(), next.end());
    level = std::move(next);
    ++size;
  }

  std::vector<Set> valid;
  for (auto& s : agony_ok) {
    if (s.size() == 1 || is_weakly_connected(union_graph(db, s))) valid.push_back(std::move(s));
  }
  std::sort(valid.begin(), valid.end(), [](const Set& a, const Set& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  return valid;
}

GroupPartition two_step_partition(const PropagationDb& db, const PartitionParams& params) {
  auto mined = mine_valid_dag_sets(db, params);
  GroupPartition out;
  out.algorithm = PartitionAlgorithm::kTwoStep;
  out.params = params;
  std::vector<char> covered(db.size(), 0);
  std::size_t remaining = db.size();
  // mined is ordered by (size desc, members asc): the first set with no
  // covered element has maximum fresh coverage and the smallest id list.
  for (const auto& set : mined) {
    if (remaining == 0) break;
    bool fresh = std::none_of(set.begin(), set.end(), [&](EntityIndex e) { return covered[e]; });
    if (!fresh) continue;
    for (EntityIndex e : set) covered[e] = 1;
    remaining -= set.size();
    out.groups.push_back(make_group(db, set, params));
  }
  return out;
}

std::vector<EntityIndex> sample_maximal_dag_set(const PropagationDb& db,
                                                std::span<const EntityIndex> uncovered,
                                                const PartitionParams& params,
                                                std::mt19937_64& rng) {
  if (uncovered.empty()) throw std::invalid_argument("sample_maximal_dag_set: nothing to cover");
  SamplingContext ctx(db, params);
  return sample_maximal(ctx, uncovered, rng);
}

GroupPartition sampling_partition(const PropagationDb& db, const PartitionParams& params) {
  params.validate();
  const Expedients& ex = params.expedients;
  SamplingContext ctx(db, params);
  std::mt19937_64 rng(params.seed);

  GroupPartition out;
  out.algorithm = PartitionAlgorithm::kSampling;
  out.params = params;

  std::vector<EntityIndex> uncovered(db.size());
  std::iota(uncovered.begin(), uncovered.end(), 0);

  auto emit_singleton = [&](EntityIndex e) {
    Group g = make_group(db, {e}, params);
    g.fallback = true;
    g.acceptance_threshold = 1;
    out.groups.push_back(std::move(g));
  };

  if (ex.drop_isolated) {
    std::vector<std::uint32_t> usage(ctx.nodes, 0);
    for (const auto& dag : db.dags) {
      for (const auto& a : dag.activations) ++usage[a.node];
    }
    std::vector<EntityIndex> kept;
    for (EntityIndex e : uncovered) {
      const auto& acts = db.dags[e].activations;
      bool isolated = std::all_of(acts.begin(), acts.end(),
                                  [&](const Activation& a) { return usage[a.node] == 1; });
      if (isolated && db.size() > 1) {
        emit_singleton(e);
      } else {
        kept.push_back(e);
      }
    }
    uncovered = std::move(kept);
  }

  const std::size_t retry_cap = params.retry_cap();
  // Without the fallback a hopeless threshold would loop forever.
  const std::size_t hard_cap = 100 * retry_cap;

  while (!uncovered.empty()) {
    if (ex.flush_threshold > 0 && uncovered.size() <= ex.flush_threshold) {
      for (EntityIndex e : uncovered) emit_singleton(e);
      break;
    }
    const std::size_t threshold =
        acceptance_threshold(params.alpha, params.max_size, uncovered.size());
    std::vector<EntityIndex> accepted;
    bool fallback = false;
    for (std::size_t attempt = 1;; ++attempt) {
      std::span<const EntityIndex> pool = uncovered;
      std::vector<EntityIndex> beam;
      if (ex.beam_factor > 0) {
        auto width = ex.beam_factor * static_cast<std::size_t>(std::ceil(
                                          std::log2(static_cast<double>(uncovered.size()) + 1)));
        if (width < uncovered.size()) {
          std::sample(uncovered.begin(), uncovered.end(), std::back_inserter(beam), width, rng);
          pool = beam;
        }
      }
      auto candidate = sample_maximal(ctx, pool, rng);
      if (candidate.size() >= threshold) {
        accepted = std::move(candidate);
        break;
      }
      if (ex.retry_fallback && attempt >= retry_cap) {
        std::uniform_int_distribution<std::size_t> pick(0, uncovered.size() - 1);
        accepted = {uncovered[pick(rng)]};
        fallback = true;
        break;
      }
      if (attempt >= hard_cap) {
        throw InfeasibleError("sampling partition: no dag set reaches the acceptance threshold " +
                              std::to_string(threshold) + "; enable the retry fallback");
      }
    }
    Group g = make_group(db, accepted, params);
    g.fallback = fallback;
    g.acceptance_threshold = threshold;
    out.groups.push_back(std::move(g));
    std::vector<EntityIndex> rest;
    std::set_difference(uncovered.begin(), uncovered.end(), accepted.begin(), accepted.end(),
                        std::back_inserter(rest));
    uncovered = std::move(rest);
  }
  return out;
}

std::vector<std::string> partition_violations(const PropagationDb& db,
                                              const GroupPartition& partition) {
  std::vector<std::string> problems;
  std::vector<int> seen(db.size(), 0);
  for (std::size_t i = 0; i < partition.groups.size(); ++i) {
    const auto& g = partition.groups[i];
    auto tag = "group " + std::to_string(i) + ": ";
    if (g.members.empty()) {
      problems.push_back(tag + "empty");
      continue;
    }
    for (EntityIndex e : g.members) {
      if (e >= db.size()) {
        problems.push_back(tag + "unknown entity index");
        continue;
      }
      if (seen[e]++) problems.push_back(tag + "entity " + db.entities.name(e) + " repeated");
    }
    if (!is_valid_group(db, g.members, partition.params)) {
      problems.push_back(tag + "violates agony, size or connectivity constraint");
    }
    auto u = union_graph(db, g.members);
    if (g.ranking.size() != u.nodes.size() || agony_of_ranking(u.graph, g.ranking) != g.agony) {
      problems.push_back(tag + "stored ranking does not attain the stored agony");
    }
  }
  for (EntityIndex e = 0; e < db.size(); ++e) {
    if (!seen[e]) problems.push_back("entity " + db.entities.name(e) + " not covered");
  }
  return problems;
}

}  // namespace cascade
