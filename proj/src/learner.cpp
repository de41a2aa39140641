#include "cascade/learner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

constexpr double kImprovement = 1e-9;

struct Cell {
  std::size_t total = 0;
  std::size_t active = 0;
};

std::map<std::string, Cell> count_configs(const ActivationMatrix& m, std::size_t column,
                                          std::span<const std::size_t> parents) {
  std::map<std::string, Cell> cells;
  std::string key(parents.size(), '0');
  for (std::size_t s = 0; s < m.samples; ++s) {
    for (std::size_t i = 0; i < parents.size(); ++i) key[i] = m.active(s, parents[i]) ? '1' : '0';
    Cell& c = cells[key];
    ++c.total;
    c.active += m.active(s, column);
  }
  return cells;
}

double cell_probability(const Cell& c, Smoothing smoothing) {
  if (smoothing == Smoothing::kLaplace) {
    return (static_cast<double>(c.active) + 1.0) / (static_cast<double>(c.total) + 2.0);
  }
  return static_cast<double>(c.active) / static_cast<double>(c.total);
}

double local_ll(const ActivationMatrix& m, std::size_t column,
                std::span<const std::size_t> parents, Smoothing smoothing) {
  double ll = 0.0;
  for (const auto& [key, c] : count_configs(m, column, parents)) {
    double p = cell_probability(c, smoothing);
    if (c.active > 0) ll += static_cast<double>(c.active) * std::log(p);
    if (c.total > c.active) ll += static_cast<double>(c.total - c.active) * std::log1p(-p);
  }
  return ll;
}

// Parent columns per column for a set of global arcs.
std::vector<std::vector<std::size_t>> parent_columns(std::span<const Arc> arcs,
                                                     const ActivationMatrix& m) {
  std::vector<std::vector<std::size_t>> parents(m.nodes.size());
  for (const Arc& a : arcs) parents[m.column(a.to)].push_back(m.column(a.from));
  for (auto& p : parents) std::sort(p.begin(), p.end());
  return parents;
}

CausalTopology finish(std::span<const Arc> candidates, std::vector<Arc> selected,
                      const ActivationMatrix& m, Criterion criterion, Smoothing smoothing) {
  CausalTopology t;
  t.criterion = criterion;
  t.candidates.assign(candidates.begin(), candidates.end());
  std::sort(t.candidates.begin(), t.candidates.end());
  std::sort(selected.begin(), selected.end());
  t.selected = std::move(selected);
  auto parents = parent_columns(t.selected, m);
  for (std::size_t j = 0; j < m.nodes.size(); ++j) {
    NodeCpt cpt;
    cpt.node = m.nodes[j];
    for (auto p : parents[j]) cpt.parents.push_back(m.nodes[p]);
    for (const auto& [key, c] : count_configs(m, j, parents[j])) {
      cpt.p_active.emplace_back(key, cell_probability(c, smoothing));
    }
    cpt.unseen = smoothing == Smoothing::kLaplace ? 0.5 : 0.0;
    t.theta.push_back(std::move(cpt));
    t.ll += local_ll(m, j, parents[j], smoothing);
  }
  t.reg = regularizer(t.selected.size(), m.samples, criterion);
  t.score = t.ll - t.reg;
  return t;
}

}  // namespace

std::string to_string(Criterion criterion) {
  return criterion == Criterion::kBic ? "bic" : "aic";
}

Criterion parse_criterion(const std::string& name) {
  if (name == "bic") return Criterion::kBic;
  if (name == "aic") return Criterion::kAic;
  throw InputError("unknown criterion '" + name + "' (expected bic or aic)");
}

std::size_t ActivationMatrix::column(NodeIndex node) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), node);
  if (it == nodes.end() || *it != node) {
    throw std::out_of_range("ActivationMatrix: node " + std::to_string(node) + " not a column");
  }
  return static_cast<std::size_t>(it - nodes.begin());
}

ActivationMatrix activation_matrix(const PropagationDb& db, std::span<const EntityIndex> group,
                                   std::span<const NodeIndex> nodes) {
  ActivationMatrix m;
  m.nodes.assign(nodes.begin(), nodes.end());
  std::sort(m.nodes.begin(), m.nodes.end());
  m.samples = group.size();
  m.cells.assign(m.samples * m.nodes.size(), 0);
  for (std::size_t s = 0; s < group.size(); ++s) {
    for (const Activation& a : db.dags.at(group[s]).activations) {
      auto it = std::lower_bound(m.nodes.begin(), m.nodes.end(), a.node);
      if (it != m.nodes.end() && *it == a.node) {
        m.cells[s * m.nodes.size() + (it - m.nodes.begin())] = 1;
      }
    }
  }
  return m;
}

std::vector<Arc> reconstruct_dag(const UnionGraph& u, std::span<const std::int64_t> ranking) {
  if (ranking.size() != u.nodes.size()) {
    throw std::invalid_argument("reconstruct_dag: ranking does not cover every node");
  }
  std::vector<Arc> out;
  for (const Arc& a : u.graph.arcs()) {
    if (ranking[a.from] < ranking[a.to]) out.push_back({u.nodes[a.from], u.nodes[a.to]});
  }
  std::sort(out.begin(), out.end());
  return out;
}

double log_likelihood(std::span<const Arc> arcs, const ActivationMatrix& m, Smoothing smoothing) {
  if (m.samples == 0) throw std::invalid_argument("log_likelihood: no samples");
  auto parents = parent_columns(arcs, m);
  double ll = 0.0;
  for (std::size_t j = 0; j < m.nodes.size(); ++j) ll += local_ll(m, j, parents[j], smoothing);
  return ll;
}

double regularizer(std::size_t arc_count, std::size_t samples, Criterion criterion) {
  if (samples == 0) throw std::invalid_argument("regularizer: no samples");
  double k = static_cast<double>(arc_count);
  if (criterion == Criterion::kAic) return k;
  return k / 2.0 * std::log(static_cast<double>(samples));
}

CausalTopology hill_climb(std::span<const Arc> candidates, const ActivationMatrix& m,
                          Criterion criterion, Smoothing smoothing) {
  if (m.samples == 0) throw std::invalid_argument("hill_climb: no samples");
  std::vector<Arc> arcs(candidates.begin(), candidates.end());
  std::sort(arcs.begin(), arcs.end());
  arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());

  const double per_arc = regularizer(1, m.samples, criterion);
  const std::size_t n = m.nodes.size();
  std::vector<std::size_t> from(arcs.size()), to(arcs.size());
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    from[i] = m.column(arcs[i].from);
    to[i] = m.column(arcs[i].to);
  }
  std::vector<std::vector<std::size_t>> parents(n);
  std::vector<double> local(n);
  for (std::size_t j = 0; j < n; ++j) local[j] = local_ll(m, j, parents[j], smoothing);
  std::vector<char> in(arcs.size(), 0);
  // Change in f from toggling arc i, kept fresh for arcs whose target moved.
  std::vector<double> gain(arcs.size());
  auto refresh = [&](std::size_t i) {
    auto trial = parents[to[i]];
    if (in[i]) {
      trial.erase(std::find(trial.begin(), trial.end(), from[i]));
    } else {
      trial.insert(std::lower_bound(trial.begin(), trial.end(), from[i]), from[i]);
    }
    double penalty = in[i] ? -per_arc : per_arc;
    gain[i] = local_ll(m, to[i], trial, smoothing) - local[to[i]] - penalty;
  };
  for (std::size_t i = 0; i < arcs.size(); ++i) refresh(i);

  while (true) {
    std::size_t best = arcs.size();
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      if (gain[i] > kImprovement && (best == arcs.size() || gain[i] > gain[best])) best = i;
    }
    if (best == arcs.size()) break;
    auto& p = parents[to[best]];
    if (in[best]) {
      p.erase(std::find(p.begin(), p.end(), from[best]));
    } else {
      p.insert(std::lower_bound(p.begin(), p.end(), from[best]), from[best]);
    }
    in[best] ^= 1;
    local[to[best]] = local_ll(m, to[best], p, smoothing);
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      if (to[i] == to[best]) refresh(i);
    }
  }

  std::vector<Arc> selected;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    if (in[i]) selected.push_back(arcs[i]);
  }
  return finish(arcs, std::move(selected), m, criterion, smoothing);
}

CausalTopology fit_all(std::span<const Arc> candidates, const ActivationMatrix& m,
                       Criterion criterion, Smoothing smoothing) {
  if (m.samples == 0) throw std::invalid_argument("fit_all: no samples");
  std::vector<Arc> arcs(candidates.begin(), candidates.end());
  return finish(candidates, std::move(arcs), m, criterion, smoothing);
}

std::vector<CausalTopology> learn_all(const GroupPartition& partition, const PropagationDb& db,
                                      const LearnOptions& options) {
  std::vector<CausalTopology> out(partition.groups.size());
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < out.size(); i = next++) {
      try {
        const Group& g = partition.groups[i];
        auto u = union_graph(db, g.members);
        auto dag = reconstruct_dag(u, g.ranking);
        auto m = activation_matrix(db, g.members, u.nodes);
        out[i] = options.baseline ? fit_all(dag, m, options.criterion, options.smoothing)
                                  : hill_climb(dag, m, options.criterion, options.smoothing);
        out[i].group = i;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = out.size();
      }
    }
  };
  unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, out.size()));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace cascade
