#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cascade/propagation.hpp"

namespace cascade {

enum class GraphModel { kErdosRenyi, kPowerLaw };

std::string to_string(GraphModel model);
GraphModel parse_graph_model(const std::string& name);

struct GeneratorConfig {
  std::size_t n = 100;
  GraphModel model = GraphModel::kErdosRenyi;
  // Pairs over C(n,2). Unset: uniform in [delta_min, delta_max].
  std::optional<double> delta;
  double delta_min = 0.05;
  double delta_max = 0.1;
  // Each selected pair becomes both arcs; otherwise one arc, random direction.
  bool symmetric = true;

  std::size_t k = 10;
  std::size_t card_min = 8;
  std::size_t card_max = 12;
  std::size_t card_overlap = 10;

  // Causal arcs over induced social arcs of the group.
  double cause_min = 0.35;
  double cause_max = 0.5;
  // Unset: two uniform (0,1) draws, sorted.
  std::optional<double> p_min;
  std::optional<double> p_max;

  std::size_t observations = 1000;  // traces, split over the k groups
  double noise = 0.05;
  double root_activation = 0.5;
  std::uint64_t seed = 0;

  // Throws InputError.
  void validate() const;
};

struct CausalArc {
  NodeIndex from = 0;
  NodeIndex to = 0;
  double p = 0.0;
};

struct GroundTruth {
  GeneratorConfig config;
  double delta = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;
  SocialGraph graph;
  std::vector<std::vector<NodeIndex>> groups;  // sorted node lists
  std::vector<std::vector<CausalArc>> causal;  // per group, sorted by (from, to)
  std::vector<double> cause_density;           // per group, as achieved
  PropagationDb db;
  std::vector<std::size_t> labels;  // planted group per entity
  std::size_t corrupted = 0;        // noisy entries injected
  std::vector<std::string> warnings;

  // Union of the causal arcs of every group.
  std::vector<Arc> true_arcs() const;
};

// Pair count round(delta * C(n,2)); throws InputError when that is 0 or
// exceeds C(n,2). Power-law: preferential attachment on a spanning core with
// an even edge schedule hitting the exact count.
SocialGraph gen_social_graph(const GeneratorConfig& config, double delta, std::mt19937_64& rng);

// k weakly connected groups grown by random frontier expansion, preferring
// uncovered nodes. Throws InfeasibleError after 1000 rejected attempts.
std::vector<std::vector<NodeIndex>> gen_groups(const Digraph& graph, const GeneratorConfig& config,
                                               std::mt19937_64& rng);

// Induced arcs, random arc deletion on cycles until acyclic, then thinning.
std::vector<CausalArc> gen_causal_dag(const Digraph& graph, const std::vector<NodeIndex>& group,
                                      double density, double p_min, double p_max,
                                      std::mt19937_64& rng);

struct Traces {
  std::vector<std::vector<Activation>> traces;
  std::vector<std::size_t> labels;
};

// Noisy-OR traces per group along one random topological order of its causal
// dag. Throws InfeasibleError when a group cannot make every node both act
// and miss within 1000 attempts.
Traces sample_traces(const std::vector<std::vector<NodeIndex>>& groups,
                     const std::vector<std::vector<CausalArc>>& causal,
                     const GeneratorConfig& config, std::mt19937_64& rng);

// Each real entry is corrupted with probability `noise`: half the time it is
// deleted, otherwise an absent group node is inserted at a random position.
// Traces left empty are dropped with a warning. Returns the corrupted count.
std::size_t inject_noise(Traces& traces, const std::vector<std::vector<NodeIndex>>& groups,
                         double noise, std::mt19937_64& rng,
                         std::vector<std::string>* warnings = nullptr);

GroundTruth generate(const GeneratorConfig& config);

}  // namespace cascade
