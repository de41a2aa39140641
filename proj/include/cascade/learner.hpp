#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cascade/agony.hpp"
#include "cascade/partition.hpp"
#include "cascade/propagation.hpp"

namespace cascade {

enum class Criterion { kBic, kAic };

std::string to_string(Criterion criterion);
Criterion parse_criterion(const std::string& name);

enum class Smoothing { kLaplace, kNone };

// Binary traces x nodes matrix of one group: cell (s, j) is 1 iff nodes[j]
// is activated in the s-th member trace.
struct ActivationMatrix {
  std::vector<NodeIndex> nodes;  // sorted global indices, one column each
  std::size_t samples = 0;
  std::vector<std::uint8_t> cells;  // row-major

  bool active(std::size_t sample, std::size_t column) const {
    return cells[sample * nodes.size() + column] != 0;
  }
  // Column of a global node; throws std::out_of_range if absent.
  std::size_t column(NodeIndex node) const;
};

ActivationMatrix activation_matrix(const PropagationDb& db, std::span<const EntityIndex> group,
                                   std::span<const NodeIndex> nodes);

// Conditional activation probabilities of one node. Configurations are
// strings with one '0'/'1' per parent, in parent order; only configurations
// seen in the data are listed, the rest get `unseen`.
struct NodeCpt {
  NodeIndex node = 0;
  std::vector<NodeIndex> parents;
  std::vector<std::pair<std::string, double>> p_active;
  double unseen = 0.5;
};

struct CausalTopology {
  std::size_t group = 0;
  Criterion criterion = Criterion::kBic;
  std::vector<Arc> candidates;  // global indices, sorted
  std::vector<Arc> selected;    // subset of candidates
  std::vector<NodeCpt> theta;   // one per matrix column
  double ll = 0.0;
  double reg = 0.0;
  double score = 0.0;  // ll - reg
};

// Union arcs (u,v) with r(u) < r(v), as global arcs. The ranking is indexed
// like union_graph.graph.
std::vector<Arc> reconstruct_dag(const UnionGraph& u, std::span<const std::int64_t> ranking);

// Sum over samples and nodes of ln P(x_v | x_parents) under the CPTs fitted
// to the same matrix. Arcs are global and must lie within the matrix nodes.
double log_likelihood(std::span<const Arc> arcs, const ActivationMatrix& m,
                      Smoothing smoothing = Smoothing::kLaplace);

// |A| for AIC, |A|/2 ln S for BIC.
double regularizer(std::size_t arc_count, std::size_t samples, Criterion criterion);

// Greedy forward/backward search over subsets of `candidates`, starting
// empty; each step applies the best strictly improving single-arc toggle.
CausalTopology hill_climb(std::span<const Arc> candidates, const ActivationMatrix& m,
                          Criterion criterion, Smoothing smoothing = Smoothing::kLaplace);

// Keeps every candidate arc, with the matching fit and score.
CausalTopology fit_all(std::span<const Arc> candidates, const ActivationMatrix& m,
                       Criterion criterion, Smoothing smoothing = Smoothing::kLaplace);

struct LearnOptions {
  Criterion criterion = Criterion::kBic;
  bool baseline = false;  // skip hill climbing
  Smoothing smoothing = Smoothing::kLaplace;
  unsigned jobs = 1;
};

// Reconstruct + hill climb per group, using each group's stored ranking.
std::vector<CausalTopology> learn_all(const GroupPartition& partition, const PropagationDb& db,
                                      const LearnOptions& options);

}  // namespace cascade
